"""Heston stochastic-volatility pricing by characteristic-function inversion.

The log-price characteristic functions ``psi_j`` (j = 1, 2) are evaluated
in the rotation-free form where ``d`` has nonnegative real part and
``g~ = (beta - d)/(beta + d)``, so ``|g~ e^{-dt}| < 1`` and the complex
logarithm never crosses its branch cut. ``beta - d`` is written as
``eta^2 A / (beta + d)`` to stay accurate as ``eta -> 0``.

``psi_2`` is the risk-neutral characteristic function of ``log S_T``;
``psi_1`` is the same under the share measure, ``psi_1(w) = psi_2(w - i)/mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .numerics import QuadratureSpec, gauss_legendre_panels, integrate_semi_infinite
from .rnd import DensityCurve, MarketContext

__all__ = [
    "HestonParams",
    "CharFnTerms",
    "charfn_terms",
    "heston_charfn",
    "heston_pj",
    "heston_probabilities",
    "heston_call",
    "heston_delta",
    "heston_density",
    "heston_price_density",
    "heston_standardized_density",
    "heston_moments",
]

OMEGA_START = 200.0
OMEGA_CAP = 25600.0
TAIL_TOL = 1e-12


@dataclass(frozen=True)
class HestonParams:
    """Mean reversion ``kappa``, long-run variance ``theta``, vol-of-vol ``eta``,
    correlation ``rho`` and current variance ``v0``."""

    kappa: float
    theta: float
    eta: float
    rho: float
    v0: float

    def __post_init__(self):
        for name in ("kappa", "theta", "eta", "v0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")
        if not -1 < self.rho < 1:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")

    @property
    def feller_ratio(self) -> float:
        """``2 kappa theta / eta^2``; below 1 the variance can touch zero."""
        return 2 * self.kappa * self.theta / self.eta**2

    def as_dict(self):
        return {"kappa": self.kappa, "theta": self.theta, "eta": self.eta, "rho": self.rho, "v0": self.v0}


class CharFnTerms(NamedTuple):
    u: float
    b: float
    d: np.ndarray
    g: np.ndarray
    B: np.ndarray
    D: np.ndarray


def _log1p(z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(invalid="ignore", divide="ignore"):
        series = z * (1 - z * (1 / 2 - z * (1 / 3 - z * (1 / 4 - z * (1 / 5 - z / 6)))))
        return np.where(np.abs(z) < 1e-3, series, np.log(1.0 + z))


def charfn_terms(j: int, omega, ctx: MarketContext, params: HestonParams) -> CharFnTerms:
    """Intermediate quantities of ``psi_j``; ``omega`` may be complex."""
    if j not in (1, 2):
        raise DomainError(f"j must be 1 or 2, got {j}")
    w = np.asarray(omega, dtype=complex)
    kappa, theta, eta, rho = params.kappa, params.theta, params.eta, params.rho
    t = ctx.ttm_years
    u = 0.5 if j == 1 else -0.5
    b = kappa - rho * eta if j == 1 else kappa
    beta = b - 1j * rho * eta * w
    a = 2j * u * w - w * w
    d = np.sqrt(beta * beta - eta * eta * a)
    bd = beta + d
    with np.errstate(divide="ignore", invalid="ignore"):
        lead = a / bd  # (beta - d) / eta^2
        g = eta * eta * a / (bd * bd)
        e = np.exp(-d * t)
        D = lead * (1.0 - e) / (1.0 - g * e)
        log_ratio = _log1p(g * (1.0 - e) / (1.0 - g))
        B = kappa * theta * (lead * t - 2.0 * log_ratio / (eta * eta))
    # omega = 0 makes a = 0, which is exact for both j
    zero = a == 0
    if np.any(zero):
        D = np.where(zero, 0.0, D)
        B = np.where(zero, 0.0, B)
    return CharFnTerms(u, b, d, g, B, D)


def heston_charfn(j: int, omega, ctx: MarketContext, params: HestonParams):
    """``psi_j(omega) = exp(B_j + D_j v0 + i omega (x + r t))``, ``x = log(S e^{-lt})``."""
    terms = charfn_terms(j, omega, ctx, params)
    x = math.log(ctx.spot_pv)
    w = np.asarray(omega, dtype=complex)
    out = np.exp(terms.B + terms.D * params.v0 + 1j * w * (x + ctx.rate * ctx.ttm_years))
    return out if out.ndim else complex(out)


def heston_pj(j: int, log_strike: float, ctx: MarketContext, params: HestonParams,
              spec: QuadratureSpec | None = None) -> float:
    """In-the-money probability ``P_j`` at one log-strike by adaptive quadrature."""
    k = float(log_strike)

    def f(w):
        return (np.exp(-1j * w * k) * heston_charfn(j, w, ctx, params) / (1j * w)).real

    return 0.5 + integrate_semi_infinite(f, spec or QuadratureSpec(abs_tol=1e-10, rel_tol=1e-10)) / math.pi


def _omega_rule(ctx, params, spread, tol=TAIL_TOL):
    """Upper limit past the decay of both psi_j, and a panel width for the oscillation."""
    upper = OMEGA_START
    while upper < OMEGA_CAP:
        env = max(abs(heston_charfn(1, upper, ctx, params)), abs(heston_charfn(2, upper, ctx, params)))
        if env < tol:
            break
        upper *= 2.0
    # round the panel width to a power of two so the cached kernel is reused
    width = 2.0 ** math.floor(math.log2(min(4.0, 8.0 / max(spread, 1e-6))))
    return upper, width


@lru_cache(maxsize=8)
def _kernel(log_strikes: tuple, upper: float, width: float):
    # e^{-i w k} w_i / (i w): depends only on the strikes and the rule, so it
    # is reused across the many parameter vectors of a calibration
    nodes, weights = gauss_legendre_panels(upper, width)
    k = np.asarray(log_strikes)
    return nodes, np.exp(-1j * np.outer(k, nodes)) * (weights / (1j * nodes))[None, :]


def heston_probabilities(strike, ctx: MarketContext, params: HestonParams):
    """``(P_1, P_2)`` for an array of strikes from one shared quadrature rule."""
    k = np.log(np.atleast_1d(np.asarray(strike, dtype=float)))
    m = math.log(ctx.forward)
    upper, width = _omega_rule(ctx, params, float(np.max(np.abs(k - m))) + 1.0)
    nodes, kernel = _kernel(tuple(k.tolist()), upper, width)
    psi1 = heston_charfn(1, nodes, ctx, params)
    psi2 = heston_charfn(2, nodes, ctx, params)
    p1 = 0.5 + (kernel @ psi1).real / math.pi
    p2 = 0.5 + (kernel @ psi2).real / math.pi
    return p1, p2


def heston_call(ctx: MarketContext, strike, params: HestonParams):
    """``C = S e^{-lt} P_1 - K e^{-rt} P_2``; ``strike = 0`` gives ``S e^{-lt}``."""
    k = np.asarray(strike, dtype=float)
    if np.any(k < 0) or np.any(np.isnan(k)):
        raise DomainError("strike must be >= 0")
    flat = np.atleast_1d(k)
    price = np.full(flat.shape, ctx.spot_pv)
    pos = flat > 0
    if np.any(pos):
        p1, p2 = heston_probabilities(flat[pos], ctx, params)
        price[pos] = ctx.spot_pv * p1 - flat[pos] * ctx.discount * p2
    return price.reshape(k.shape) if k.ndim else float(price[0])


def heston_delta(ctx: MarketContext, strike, params: HestonParams):
    """``e^{-lt} P_1``."""
    k = np.asarray(strike, dtype=float)
    if np.any(k <= 0):
        raise DomainError("strike must be > 0")
    p1, _ = heston_probabilities(k, ctx, params)
    out = ctx.div_discount * p1
    return out.reshape(k.shape) if k.ndim else float(out[0])


def heston_density(ctx: MarketContext, params: HestonParams, s_grid) -> DensityCurve:
    """Risk-neutral density of ``log S_T`` on ``s_grid`` by Fourier inversion of ``psi_2``."""
    s = np.atleast_1d(np.asarray(s_grid, dtype=float))
    if s.size == 0 or np.any(np.diff(s) <= 0):
        raise DomainError("grid must be nonempty and strictly increasing")
    m = math.log(ctx.forward)
    upper, width = _omega_rule(ctx, params, float(np.max(np.abs(s - m))) + 1.0, tol=1e-14)
    nodes, weights = gauss_legendre_panels(upper, width)
    psi2 = heston_charfn(2, nodes, ctx, params) * weights
    dens = np.empty(s.size)
    # chunk the grid so the (grid x nodes) kernel stays small
    step = max(1, 2**22 // nodes.size)
    for i in range(0, s.size, step):
        dens[i:i + step] = (np.exp(-1j * np.outer(s[i:i + step], nodes)) @ psi2).real / math.pi
    return DensityCurve(s, dens)


def heston_price_density(ctx: MarketContext, params: HestonParams, prices) -> DensityCurve:
    """Density of ``S_T`` at the given prices."""
    x = np.atleast_1d(np.asarray(prices, dtype=float))
    if np.any(x <= 0):
        raise DomainError("prices must be positive")
    logc = heston_density(ctx, params, np.log(x))
    return DensityCurve(x, logc.density / x)


def heston_standardized_density(ctx: MarketContext, params: HestonParams, u_grid) -> DensityCurve:
    """Density of ``S* = S_T / mu``."""
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    mu = ctx.forward
    return heston_price_density(ctx, params, u * mu).scaled(mu)


def moment_explosion_time(n: float, params: HestonParams) -> float:
    """Horizon beyond which ``E[S_T^n]`` is infinite (``inf`` if never)."""
    beta = params.kappa - params.rho * params.eta * n
    disc = beta**2 - params.eta**2 * (n * n - n)
    if disc >= 0:
        if beta >= 0:
            return math.inf
        d = math.sqrt(disc)
        return math.log((beta - d) / (beta + d)) / d if d > 0 else -2.0 / beta
    root = math.sqrt(-disc)
    return 2.0 / root * (math.pi * (beta < 0) + math.atan(root / beta)) if beta != 0 else math.pi / root


def heston_moments(ctx: MarketContext, params: HestonParams) -> tuple[float, float, float, float]:
    """Mean, variance, skewness, excess kurtosis of ``S*`` from ``E[S_T^n] = psi_2(-i n)``.

    Exact up to rounding whenever the fourth moment is finite.
    """
    for n in (2, 3, 4):
        if ctx.ttm_years >= moment_explosion_time(n, params):
            raise DomainError(f"E[S_T^{n}] is infinite at t={ctx.ttm_years:.6g}")
    mu = ctx.forward
    m = [1.0] + [float((heston_charfn(2, -1j * n, ctx, params) / mu**n).real) for n in (1, 2, 3, 4)]
    mean = m[1]
    c2 = m[2] - mean**2
    c3 = m[3] - 3 * mean * m[2] + 2 * mean**3
    c4 = m[4] - 4 * mean * m[3] + 6 * mean**2 * m[2] - 3 * mean**4
    if not (np.isfinite(c4) and c2 > 0):
        raise DomainError("Heston fourth moment is not finite for these parameters")
    return mean, c2, c3 / c2**1.5, c4 / c2**2 - 3.0
