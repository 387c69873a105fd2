"""Inverse Generalized Gamma standardized RND.

``U ~ IGG(lam, xi, alpha)`` means ``(U/lam)**(-xi) ~ Gamma(alpha, 1)``.
Moments ``E[U**j]`` exist only for ``xi > j/alpha``; with
``ht_j(xi) = Gamma(alpha - j/xi) / Gamma(alpha)`` the standardization is
``ht_2/ht_1**2 = 1 + nu**2`` on ``xi > 2/alpha`` and ``lam = 1/ht_1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import BracketError, DomainError, InfeasibleError, MomentError
from .numerics import find_root, gamma_cdf, gamma_sf, log_gamma_ratio
from .rnd import MarketContext, StandardizedRND

__all__ = ["IGGParams", "igg_solve_shape", "igg_cdf", "igg_pdf", "igg_delta1", "igg_call", "igg_skew_kurt"]

MAX_EXPANSIONS = 10
# past this the family is the lognormal to ~1e-4 and double precision
# in the incomplete gamma functions starts to fail
ALPHA_MAX = 1e8


def _log_ht(alpha, xi, j):
    return log_gamma_ratio(alpha, -j / xi)


def igg_solve_shape(alpha: float, nu: float) -> float:
    """Power ``xi* > 2/alpha`` giving the unit-mean IGG variance ``nu**2``.

    Raises
    ------
    InfeasibleError
        If no root is found in ``(2/alpha, 64 * 2**10 * max(1, 2/alpha))``.
    """
    if not (alpha > 0 and nu > 0):
        raise DomainError(f"alpha and nu must be > 0, got alpha={alpha}, nu={nu}")
    if alpha > ALPHA_MAX:
        raise DomainError(f"alpha={alpha:g} above {ALPHA_MAX:g}; use the lognormal limit")
    target = math.log1p(nu * nu)

    def f(xi):
        return _log_ht(alpha, xi, 2) - 2.0 * _log_ht(alpha, xi, 1) - target

    edge = 2.0 / alpha
    lo = edge * (1.0 + 1e-12)
    hi = 64.0 * max(1.0, edge)
    if not f(lo) > 0:
        raise InfeasibleError(f"IGG variance at xi -> 2/alpha does not exceed nu^2 (alpha={alpha}, nu={nu})")
    for _ in range(MAX_EXPANSIONS + 1):
        if f(hi) < 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise InfeasibleError(f"no IGG shape with xi > 2/alpha for alpha={alpha}, nu={nu}")
    try:
        return find_root(f, lo, hi, tol=1e-14 * hi)
    except BracketError as exc:
        raise InfeasibleError(str(exc)) from exc


@dataclass(frozen=True)
class IGGParams(StandardizedRND):
    """Solved IGG parameters; use :meth:`from_sigma` or :meth:`from_nu`."""

    alpha: float
    nu: float
    xi_star: float
    log_h1: float
    log_h2: float
    sigma: float | None = None

    @classmethod
    def from_nu(cls, alpha, nu, sigma=None):
        xi = igg_solve_shape(alpha, nu)
        return cls(float(alpha), float(nu), xi, float(_log_ht(alpha, xi, 1)), float(_log_ht(alpha, xi, 2)), sigma)

    @property
    def h1(self) -> float:
        return float(np.exp(self.log_h1))

    @property
    def h2(self) -> float:
        return float(np.exp(self.log_h2))

    @property
    def lambda_star(self) -> float:
        return float(np.exp(-self.log_h1))

    @classmethod
    def from_sigma(cls, alpha, sigma, ttm_years):
        if not sigma > 0:
            raise DomainError(f"sigma must be > 0, got {sigma}")
        return cls.from_nu(alpha, sigma * math.sqrt(ttm_years), sigma=float(sigma))

    def _y(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0) or np.any(np.isnan(u)):
            raise DomainError("u must be >= 0")
        with np.errstate(over="ignore", divide="ignore"):
            return np.exp(-self.xi_star * (np.log(u) + self.log_h1))

    def cdf(self, u):
        return gamma_sf(self._y(u), self.alpha)

    def sf(self, u):
        return gamma_cdf(self._y(u), self.alpha)

    def pdf(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0) or np.any(np.isnan(u)):
            raise DomainError("u must be >= 0")
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            logy = -self.xi_star * (np.log(u) + self.log_h1)
            logq = math.log(self.xi_star) - np.log(u) + self.alpha * logy - np.exp(logy) - special.gammaln(self.alpha)
            out = np.where(u > 0, np.exp(logq), 0.0)
        return out if out.ndim else float(out)

    def delta1(self, s):
        return gamma_cdf(self._y(s), self.alpha - 1.0 / self.xi_star)

    def raw_moment(self, j):
        if not self.xi_star > j / self.alpha:
            raise MomentError(f"moment {j} requires xi* > {j}/alpha")
        return math.exp(_log_ht(self.alpha, self.xi_star, j) - j * self.log_h1)


def igg_cdf(u, params: IGGParams):
    """``Q1(u) = 1 - G((u/lam*)^(-xi*); alpha, 1)``."""
    return params.cdf(u)


def igg_pdf(u, params: IGGParams):
    return params.pdf(u)


def igg_delta1(s, params: IGGParams):
    """``Delta1(s) = G((s/lam*)^(-xi*); alpha - 1/xi*, 1)``."""
    if not params.alpha - 1.0 / params.xi_star > 0:
        raise MomentError("mean does not exist")
    return params.delta1(s)


def igg_call(ctx: MarketContext, strike, params: IGGParams):
    """Closed-form IGG call price.

    ``C = S e^{-lt} G(d; alpha - 1/xi, 1) - K e^{-rt} G(d; alpha, 1)`` with
    ``d = (K e^{-rt} ht1 / (S e^{-lt}))**(-xi)``.
    """
    k = np.asarray(strike, dtype=float)
    if np.any(k < 0):
        raise DomainError("strike must be >= 0")
    with np.errstate(over="ignore", divide="ignore"):
        d = np.exp(-params.xi_star * (np.log(k * ctx.discount / ctx.spot_pv) + params.log_h1))
    price = ctx.spot_pv * gamma_cdf(d, params.alpha - 1.0 / params.xi_star) - k * ctx.discount * gamma_cdf(d, params.alpha)
    return price if np.ndim(price) else float(price)


def igg_skew_kurt(params: IGGParams) -> tuple[float, float]:
    """Skewness and excess kurtosis; requires ``xi* > 4/alpha``."""
    if not params.xi_star > 4.0 / params.alpha:
        raise MomentError("fourth moment requires xi* > 4/alpha")
    return params.skew_kurt()
