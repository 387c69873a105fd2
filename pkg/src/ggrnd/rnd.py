"""Scale-family risk-neutral densities and model-free pricing.

A standardized RND is the distribution of ``U = S_T / mu`` where ``mu`` is
the forward price, so ``E[U] = 1`` and ``Var[U] = nu**2``. Any such
distribution prices a call through its cdf ``Q1`` and partial-expectation
function ``Delta1(s) = int_s^inf u q1(u) du``::

    C(K) = S e^{-lt} Delta1(K/mu) - K e^{-rt} (1 - Q1(K/mu))

Dividends are treated as a continuous yield ``l``: ``mu = S e^{(r-l)t}``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import find_root

__all__ = [
    "MarketContext",
    "StandardizedRND",
    "DensityCurve",
    "forward",
    "call_price",
    "put_price",
    "delta",
    "undiscounted_delta",
    "strike_for_delta",
    "density_curve",
]


@dataclass(frozen=True)
class MarketContext:
    """Spot, continuously compounded rate and dividend yield, time to expiry in years."""

    spot: float
    rate: float
    div_yield: float
    ttm_years: float

    def __post_init__(self):
        if not self.spot > 0:
            raise DomainError(f"spot must be > 0, got {self.spot}")
        if not self.ttm_years > 0:
            raise DomainError(f"ttm_years must be > 0, got {self.ttm_years}")
        for name in ("rate", "div_yield"):
            v = getattr(self, name)
            if not -1 < v < 1:
                raise DomainError(f"{name} must lie in (-1, 1), got {v}")

    @classmethod
    def from_dte(cls, spot, rate, div_yield, dte_days):
        """Build a context with ``t = dte_days / 365``."""
        return cls(float(spot), float(rate), float(div_yield), dte_days / 365.0)

    @property
    def forward(self) -> float:
        return self.spot * math.exp((self.rate - self.div_yield) * self.ttm_years)

    @property
    def discount(self) -> float:
        return math.exp(-self.rate * self.ttm_years)

    @property
    def div_discount(self) -> float:
        return math.exp(-self.div_yield * self.ttm_years)

    @property
    def spot_pv(self) -> float:
        """Dividend-adjusted spot ``S e^{-lt}``."""
        return self.spot * self.div_discount


class StandardizedRND(ABC):
    """Unit-mean distribution on (0, inf) with variance ``nu**2``.

    Implementations are immutable and vectorized over ``u``/``s``.
    """

    nu: float

    @abstractmethod
    def cdf(self, u):
        ...

    @abstractmethod
    def pdf(self, u):
        ...

    @abstractmethod
    def delta1(self, s):
        """Partial expectation ``int_s^inf u q1(u) du``."""

    @abstractmethod
    def raw_moment(self, j: int) -> float:
        """``E[U**j]``."""

    def sf(self, u):
        return 1.0 - self.cdf(u)

    def skew_kurt(self) -> tuple[float, float]:
        """Skewness and excess kurtosis of ``U``."""
        nu = self.nu
        m3, m4 = self.raw_moment(3), self.raw_moment(4)
        skew = (m3 - 3 * nu**2 - 1) / nu**3
        kurt = (m4 - 4 * nu**3 * skew - 6 * nu**2 - 1) / nu**4
        return float(skew), float(kurt - 3.0)


@dataclass(frozen=True)
class DensityCurve:
    """Samples ``(x, density)`` of a density on an increasing grid."""

    x: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "density", np.asarray(self.density, dtype=float))
        if self.x.shape != self.density.shape or self.x.ndim != 1:
            raise DomainError("x and density must be 1-d arrays of equal length")

    def __len__(self):
        return len(self.x)

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.x)) if len(self) > 1 else 0.0

    def scaled(self, c: float) -> "DensityCurve":
        """Density of ``X / c`` given this density of ``X``."""
        return DensityCurve(self.x / c, self.density * c)

    def moments(self) -> tuple[float, float, float, float]:
        """Mean, variance, skewness and excess kurtosis by trapezoid quadrature.

        The curve is renormalized by its own integral first, so truncation
        of the grid only affects the tails it cuts.
        """
        x, q = self.x, self.density
        m0 = np.trapezoid(q, x)
        mean = np.trapezoid(x * q, x) / m0
        c2, c3, c4 = (np.trapezoid((x - mean) ** k * q, x) / m0 for k in (2, 3, 4))
        return float(mean), float(c2), float(c3 / c2**1.5), float(c4 / c2**2 - 3.0)

    def rows(self):
        return list(zip(self.x.tolist(), self.density.tolist()))


def forward(ctx: MarketContext) -> float:
    """Forward price ``mu = S e^{(r-l)t}``."""
    return ctx.forward


def _strikes(strike):
    k = np.asarray(strike, dtype=float)
    if np.any(k < 0) or np.any(np.isnan(k)):
        raise DomainError("strike must be >= 0")
    return k


def _out(x):
    return x if np.ndim(x) else float(x)


def call_price(rnd: StandardizedRND, ctx: MarketContext, strike):
    """European call price under the scale family generated by ``rnd``."""
    k = _strikes(strike)
    s = k / ctx.forward
    price = ctx.spot_pv * rnd.delta1(s) - k * ctx.discount * rnd.sf(s)
    return _out(price)


def put_price(rnd: StandardizedRND, ctx: MarketContext, strike):
    """European put by put-call parity."""
    k = _strikes(strike)
    return _out(call_price(rnd, ctx, k) - ctx.spot_pv + k * ctx.discount)


def undiscounted_delta(rnd: StandardizedRND, ctx: MarketContext, strike):
    """``Delta1(K/mu)`` without the dividend factor."""
    k = _strikes(strike)
    return _out(rnd.delta1(k / ctx.forward))


def delta(rnd: StandardizedRND, ctx: MarketContext, strike):
    """Call hedge ratio ``dC/dS = e^{-lt} Delta1(K/mu)``."""
    return _out(ctx.div_discount * np.asarray(undiscounted_delta(rnd, ctx, strike)))


def strike_for_delta(rnd: StandardizedRND, ctx: MarketContext, target_delta: float, side: str = "call") -> float:
    """Strike whose call (or put) delta equals ``target_delta``.

    Put delta is ``call delta - e^{-lt}``; a put target may be given
    either signed (``-0.25``) or as a magnitude.
    """
    cap = ctx.div_discount
    if side == "call":
        target = target_delta
    elif side == "put":
        target = cap - abs(target_delta)
    else:
        raise DomainError(f"side must be 'call' or 'put', got {side!r}")
    if not 0 < abs(target_delta) < cap:
        raise DomainError(f"target delta magnitude must lie in (0, {cap:.6g})")

    mu = ctx.forward

    def f(k):
        return cap * float(rnd.delta1(k / mu)) - target

    lo, hi = 0.5 * mu, 2.0 * mu
    for _ in range(200):
        if f(lo) > 0:
            break
        lo *= 0.5
    for _ in range(200):
        if f(hi) < 0:
            break
        hi *= 2.0
    if not (f(lo) > 0 > f(hi)):
        raise DomainError(f"delta {target_delta} not attainable on ({lo:.3g}, {hi:.3g})")
    return find_root(f, lo, hi, tol=1e-10 * mu)


def density_curve(rnd: StandardizedRND, ctx: MarketContext, grid) -> DensityCurve:
    """Price-space density ``q_mu(x) = q1(x/mu)/mu`` sampled on ``grid``."""
    x = np.atleast_1d(np.asarray(grid, dtype=float))
    if x.size == 0:
        raise DomainError("empty grid")
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise DomainError("grid must be positive and strictly increasing")
    mu = ctx.forward
    return DensityCurve(x, np.asarray(rnd.pdf(x / mu), dtype=float) / mu)
