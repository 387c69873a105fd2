"""Black-Scholes pricing, delta, implied volatility and the log-normal RND."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, DomainError
from .numerics import find_root, norm_cdf, norm_pdf
from .rnd import MarketContext, StandardizedRND

__all__ = ["BSParams", "LognormalRND", "bs_call", "bs_delta", "implied_vol", "lognormal_rnd"]

IV_LO, IV_HI = 1e-4, 5.0


@dataclass(frozen=True)
class BSParams:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    def nu(self, ttm_years):
        return self.sigma * math.sqrt(ttm_years)


def _d1(ctx, k, nu):
    with np.errstate(divide="ignore"):
        return (np.log(ctx.forward / k) + 0.5 * nu * nu) / nu


def bs_call(ctx: MarketContext, strike, params: BSParams):
    """Black-Scholes call on a dividend-paying spot, ``S -> S e^{-lt}``.

    ``strike = 0`` is returned as its limit ``S e^{-lt}``.
    """
    k = np.asarray(strike, dtype=float)
    if np.any(k < 0) or np.any(np.isnan(k)):
        raise DomainError("strike must be >= 0")
    nu = params.nu(ctx.ttm_years)
    d1 = _d1(ctx, k, nu)
    price = ctx.spot_pv * norm_cdf(d1) - k * ctx.discount * norm_cdf(d1 - nu)
    price = np.where(k == 0, ctx.spot_pv, price)
    return price if price.ndim else float(price)


def bs_delta(ctx: MarketContext, strike, params: BSParams):
    """``e^{-lt} Phi(d1)``."""
    k = np.asarray(strike, dtype=float)
    if np.any(k < 0):
        raise DomainError("strike must be >= 0")
    out = ctx.div_discount * np.asarray(norm_cdf(_d1(ctx, k, params.nu(ctx.ttm_years))))
    return out if out.ndim else float(out)


def implied_vol(ctx: MarketContext, strike: float, price: float) -> float:
    """Black-Scholes volatility reproducing ``price``.

    Bracketed Brent search on ``[1e-4, 5]``; prices below the model value at
    ``sigma = 1e-4`` (but above intrinsic) are searched on ``[1e-10, 1e-4]``.

    Raises
    ------
    DomainError
        If ``price`` violates the no-arbitrage bounds.
    """
    if not strike > 0:
        raise DomainError("strike must be > 0")
    lower = max(ctx.spot_pv - strike * ctx.discount, 0.0)
    upper = ctx.spot_pv
    if not lower < price < upper:
        raise DomainError(f"price {price} outside no-arbitrage bounds ({lower:.10g}, {upper:.10g})")

    def f(sig):
        return bs_call(ctx, strike, BSParams(sig)) - price

    lo, hi = IV_LO, IV_HI
    if f(lo) > 0:
        lo, hi = 1e-10, IV_LO
    try:
        sig = find_root(f, lo, hi, tol=1e-15)
    except BracketError as exc:
        raise DomainError(f"no implied volatility in [{lo}, {hi}] for price {price}") from exc
    return sig


@dataclass(frozen=True)
class LognormalRND(StandardizedRND):
    """``log U ~ N(-nu^2/2, nu^2)``: the standardized Black-Scholes RND."""

    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"nu must be > 0, got {self.nu}")

    def _z(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0):
            raise DomainError("u must be >= 0")
        with np.errstate(divide="ignore"):
            return (np.log(u) + 0.5 * self.nu**2) / self.nu

    def cdf(self, u):
        return norm_cdf(self._z(u))

    def sf(self, u):
        return norm_cdf(-self._z(u))

    def pdf(self, u):
        u = np.asarray(u, dtype=float)
        z = self._z(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(u > 0, norm_pdf(z) / (self.nu * u), 0.0)
        return out if out.ndim else float(out)

    def delta1(self, s):
        return norm_cdf(self.nu - self._z(s))

    def raw_moment(self, j):
        return math.exp(0.5 * j * (j - 1) * self.nu**2)

    def skew_kurt(self):
        w = math.exp(self.nu**2)
        return (w + 2) * math.sqrt(w - 1), w**4 + 2 * w**3 + 3 * w**2 - 6


def lognormal_rnd(nu: float) -> LognormalRND:
    return LognormalRND(float(nu))
