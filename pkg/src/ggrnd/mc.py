"""Monte-Carlo simulation of the Heston SDE.

The variance follows the reflected Milstein scheme::

    V_{n+1} = | V_n + kappa (theta - V_n) dt + eta sqrt(V_n dt) Z2 + eta^2 dt (Z2^2 - 1) / 4 |

and the log-price an Euler step driven by ``rho Z2 + sqrt(1 - rho^2) Z1``.
Each path draws from its own generator seeded by ``(seed, path_index)``,
so results do not depend on how paths are blocked or parallelized.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .heston import HestonParams
from .rnd import MarketContext

__all__ = [
    "SimConfig",
    "TerminalSample",
    "SampleMoments",
    "simulate",
    "discounted_payoff_mean",
    "sample_moments",
    "histogram",
    "write_terminal_csv",
    "write_histogram_csv",
]

BLOCK = 2048


@dataclass(frozen=True)
class SimConfig:
    paths: int = 30000
    steps_per_year: int = 365 * 4
    seed: int = 0
    antithetic: bool = False
    scheme: str = "milstein"

    def __post_init__(self):
        if self.paths < 1:
            raise DomainError("paths must be >= 1")
        if self.steps_per_year < 1:
            raise DomainError("steps_per_year must be >= 1")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")
        if self.scheme not in ("milstein", "euler"):
            raise DomainError(f"unknown scheme {self.scheme!r}")

    def n_steps(self, ttm_years):
        return max(1, math.ceil(self.steps_per_year * ttm_years - 1e-9))


@dataclass(frozen=True)
class TerminalSample:
    s_t: np.ndarray
    v_t: np.ndarray
    mu: float

    @property
    def standardized(self) -> np.ndarray:
        return self.s_t / self.mu

    def __len__(self):
        return len(self.s_t)


class SampleMoments(NamedTuple):
    mean: float
    variance: float
    skew: float
    excess_kurtosis: float


def _normals(seed, first, count, n_steps, antithetic):
    """(count, n_steps, 2) standard normals for paths first .. first+count-1."""
    z = np.empty((count, n_steps, 2))
    for i in range(count):
        p = first + i
        stream, sign = (p // 2, 1.0 - 2.0 * (p % 2)) if antithetic else (p, 1.0)
        z[i] = sign * np.random.default_rng([seed, stream]).standard_normal((n_steps, 2))
    return z


def simulate(ctx: MarketContext, params: HestonParams, cfg: SimConfig = SimConfig()) -> TerminalSample:
    """Terminal ``(S_T, V_T)`` for ``cfg.paths`` independent paths."""
    n = cfg.n_steps(ctx.ttm_years)
    dt = ctx.ttm_years / n
    kappa, theta, eta, rho = params.kappa, params.theta, params.eta, params.rho
    rho_c = math.sqrt(1.0 - rho * rho)
    drift = (ctx.rate - ctx.div_yield) * dt
    s_out = np.empty(cfg.paths)
    v_out = np.empty(cfg.paths)
    for first in range(0, cfg.paths, BLOCK):
        count = min(BLOCK, cfg.paths - first)
        z = _normals(cfg.seed, first, count, n, cfg.antithetic)
        x = np.full(count, math.log(ctx.spot))
        v = np.full(count, params.v0)
        for step in range(n):
            z1, z2 = z[:, step, 0], z[:, step, 1]
            if cfg.scheme == "milstein":
                sv = np.sqrt(v * dt)
                x += drift - 0.5 * v * dt + sv * (rho * z2 + rho_c * z1)
                v = np.abs(v + kappa * (theta - v) * dt + eta * sv * z2 + 0.25 * eta * eta * dt * (z2 * z2 - 1.0))
            else:
                # full truncation Euler
                vp = np.maximum(v, 0.0)
                sv = np.sqrt(vp * dt)
                x += drift - 0.5 * vp * dt + sv * (rho * z2 + rho_c * z1)
                v = v + kappa * (theta - vp) * dt + eta * sv * z2
        s_out[first:first + count] = np.exp(x)
        v_out[first:first + count] = np.maximum(v, 0.0)
    return TerminalSample(s_out, v_out, ctx.forward)


def discounted_payoff_mean(sample: TerminalSample, ctx: MarketContext, strike):
    """``e^{-rt} mean((S_T - K)^+)`` and its standard error, per strike."""
    k = np.atleast_1d(np.asarray(strike, dtype=float))
    pay = ctx.discount * np.maximum(sample.s_t[None, :] - k[:, None], 0.0)
    mean = pay.mean(axis=1)
    se = pay.std(axis=1, ddof=1) / math.sqrt(pay.shape[1]) if pay.shape[1] > 1 else np.full_like(mean, np.nan)
    if np.ndim(strike) == 0:
        return float(mean[0]), float(se[0])
    return mean, se


def sample_moments(sample) -> SampleMoments:
    """Moments of the standardized sample ``S* = S_T / mu``.

    Skewness and kurtosis are NaN when the sample has zero variance.
    """
    u = sample.standardized if isinstance(sample, TerminalSample) else np.asarray(sample, dtype=float)
    mean = float(u.mean())
    c = u - mean
    var = float(np.mean(c * c))
    if var <= 0:
        return SampleMoments(mean, 0.0, math.nan, math.nan)
    return SampleMoments(mean, var, float(np.mean(c**3)) / var**1.5, float(np.mean(c**4)) / var**2 - 3.0)


def histogram(sample, bins: int = 50, range=None):
    """Density-normalized histogram of ``S*`` as an ``(n, 2)`` array of (bin_center, density)."""
    if bins < 1:
        raise DomainError("bins must be >= 1")
    u = sample.standardized if isinstance(sample, TerminalSample) else np.asarray(sample, dtype=float)
    dens, edges = np.histogram(u, bins=bins, range=range, density=True)
    return np.column_stack([0.5 * (edges[:-1] + edges[1:]), dens])


def write_terminal_csv(sample: TerminalSample, path, standardized=True):
    values = sample.standardized if standardized else sample.s_t
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s_star" if standardized else "s_t"])
        w.writerows([f"{v:.12g}"] for v in values)


def write_histogram_csv(hist, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_center", "density"])
        w.writerows([f"{c:.12g}", f"{d:.12g}"] for c, d in hist)
