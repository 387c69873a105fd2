"""Generalized Gamma standardized RND.

``U ~ GG(lam, xi, alpha)`` means ``(U/lam)**xi ~ Gamma(alpha, 1)``. For a
given shape ``alpha`` and target spread ``nu`` the power ``xi`` is fixed by
requiring ``Var[U] = nu**2`` and the scale by ``E[U] = 1``. With
``h_j(xi) = Gamma(alpha + j/xi) / Gamma(alpha)`` these conditions read
``h_2/h_1**2 = 1 + nu**2`` and ``lam = 1/h_1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import BracketError, DomainError, MomentError
from .numerics import find_root, gamma_cdf, gamma_sf, log_gamma_ratio
from .rnd import MarketContext, StandardizedRND

__all__ = ["GGParams", "solve_shape", "gg_cdf", "gg_pdf", "gg_delta1", "gg_call", "gg_skew_kurt"]

XI_LO = 1e-3
XI_HI = 64.0
MAX_EXPANSIONS = 10
# past this the family is the lognormal to ~1e-4 and double precision
# in the incomplete gamma functions starts to fail
ALPHA_MAX = 1e8


def _log_h(alpha, xi, j):
    return log_gamma_ratio(alpha, j / xi)


def _shape_residual(alpha, nu):
    target = math.log1p(nu * nu)

    def f(xi):
        return _log_h(alpha, xi, 2) - 2.0 * _log_h(alpha, xi, 1) - target

    return f


def solve_shape(alpha: float, nu: float) -> float:
    """Power ``xi* > 0`` giving the unit-mean GG variance ``nu**2``.

    The log variance ratio ``log h_2 - 2 log h_1`` decreases from +inf to 0
    as ``xi`` runs over (0, inf), so the root is unique. The upper bracket
    end is doubled up to ten times before giving up.
    """
    if not (alpha > 0 and nu > 0):
        raise DomainError(f"alpha and nu must be > 0, got alpha={alpha}, nu={nu}")
    if alpha > ALPHA_MAX:
        raise DomainError(f"alpha={alpha:g} above {ALPHA_MAX:g}; use the lognormal limit")
    f = _shape_residual(alpha, nu)
    lo, hi = XI_LO, XI_HI
    if f(lo) < 0:
        raise BracketError(f"nu={nu} too large for alpha={alpha}: no GG shape above xi={lo}")
    for _ in range(MAX_EXPANSIONS + 1):
        if f(hi) < 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BracketError(f"no GG shape root below xi={hi / 2} for alpha={alpha}, nu={nu}")
    return find_root(f, lo, hi, tol=1e-14 * hi)


@dataclass(frozen=True)
class GGParams(StandardizedRND):
    """Solved GG parameters; use :meth:`from_sigma` or :meth:`from_nu`."""

    alpha: float
    nu: float
    xi_star: float
    log_h1: float
    log_h2: float
    sigma: float | None = None

    @classmethod
    def from_nu(cls, alpha, nu, sigma=None):
        xi = solve_shape(alpha, nu)
        return cls(float(alpha), float(nu), xi, float(_log_h(alpha, xi, 1)), float(_log_h(alpha, xi, 2)), sigma)

    # h1 grows like alpha**(1/xi) and overflows for very large alpha, so the
    # computations below work with log_h1; these are for display
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
        """Annualized ``sigma``; ``nu = sigma * sqrt(t)``."""
        if not sigma > 0:
            raise DomainError(f"sigma must be > 0, got {sigma}")
        return cls.from_nu(alpha, sigma * math.sqrt(ttm_years), sigma=float(sigma))

    def _y(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0) or np.any(np.isnan(u)):
            raise DomainError("u must be >= 0")
        with np.errstate(over="ignore", divide="ignore"):
            return np.exp(self.xi_star * (np.log(u) + self.log_h1))

    def cdf(self, u):
        return gamma_cdf(self._y(u), self.alpha)

    def sf(self, u):
        return gamma_sf(self._y(u), self.alpha)

    def pdf(self, u):
        # q1(u) = (xi/u) y^alpha e^{-y} / Gamma(alpha), y = (u/lam)^xi
        u = np.asarray(u, dtype=float)
        if np.any(u < 0) or np.any(np.isnan(u)):
            raise DomainError("u must be >= 0")
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            logy = self.xi_star * (np.log(u) + self.log_h1)
            logq = math.log(self.xi_star) - np.log(u) + self.alpha * logy - np.exp(logy) - special.gammaln(self.alpha)
            out = np.where(u > 0, np.exp(logq), 0.0)
        return out if out.ndim else float(out)

    def delta1(self, s):
        return gamma_sf(self._y(s), self.alpha + 1.0 / self.xi_star)

    def raw_moment(self, j):
        if not self.alpha + j / self.xi_star > 0:
            raise MomentError(f"moment {j} does not exist")
        return math.exp(_log_h(self.alpha, self.xi_star, j) - j * self.log_h1)


def gg_cdf(u, params: GGParams):
    return params.cdf(u)


def gg_pdf(u, params: GGParams):
    return params.pdf(u)


def gg_delta1(s, params: GGParams):
    """Closed-form ``Delta1(s) = 1 - G((s/lam*)^xi*; alpha + 1/xi*, 1)``."""
    return params.delta1(s)


def gg_call(ctx: MarketContext, strike, params: GGParams):
    """Closed-form GG call price.

    ``C = S e^{-lt} [1 - G(d; alpha + 1/xi, 1)] - K e^{-rt} [1 - G(d; alpha, 1)]``
    with ``d = (K e^{-rt} h1 / (S e^{-lt}))**xi``.
    """
    k = np.asarray(strike, dtype=float)
    if np.any(k < 0):
        raise DomainError("strike must be >= 0")
    with np.errstate(over="ignore", divide="ignore"):
        d = np.exp(params.xi_star * (np.log(k * ctx.discount / ctx.spot_pv) + params.log_h1))
    price = ctx.spot_pv * gamma_sf(d, params.alpha + 1.0 / params.xi_star) - k * ctx.discount * gamma_sf(d, params.alpha)
    return price if np.ndim(price) else float(price)


def gg_skew_kurt(params: GGParams) -> tuple[float, float]:
    """Skewness and excess kurtosis of the standardized GG variable."""
    if not params.alpha + 4.0 / params.xi_star > 0:
        raise MomentError("fourth moment does not exist")
    return params.skew_kurt()
