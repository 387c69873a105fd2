"""Special functions, quadrature and root finding used by every pricing model.

Scalar and array arguments are both accepted wherever the underlying
ufunc allows it; domain checks are applied element-wise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from .errors import BracketError, ConvergenceError, DomainError

__all__ = [
    "QuadratureSpec",
    "ln_gamma",
    "log_gamma_ratio",
    "gamma_cdf",
    "gamma_sf",
    "gamma_pdf",
    "norm_cdf",
    "norm_pdf",
    "find_root",
    "integrate_semi_infinite",
    "gauss_legendre_panels",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and truncation for integrals over (0, inf).

    ``truncation_omega`` is the first finite upper limit tried; it is
    doubled up to ``max_doublings`` times while the outermost panel still
    contributes more than ``abs_tol``.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    max_subdivisions: int = 500
    truncation_omega: float = 200.0
    max_doublings: int = 3

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if not self.truncation_omega > 0:
            raise DomainError("truncation_omega must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")
        if self.max_doublings < 0:
            raise DomainError("max_doublings must be nonnegative")


def _check_positive(name, value):
    if np.any(~(np.asarray(value) > 0)):
        raise DomainError(f"{name} must be > 0, got {value!r}")


def ln_gamma(a):
    """Natural log of the gamma function for a > 0."""
    _check_positive("a", a)
    return special.gammaln(a)


# Stirling remainder coefficients: lnGamma(z) = (z - 1/2) ln z - z + ln(2 pi)/2 + sum c_k / z^(2k-1)
_STIRLING = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680)
_RATIO_SWITCH = 50.0


def _stirling_tail(z):
    zi = 1.0 / z
    z2 = zi * zi
    return zi * (_STIRLING[0] + z2 * (_STIRLING[1] + z2 * (_STIRLING[2] + z2 * _STIRLING[3])))


def log_gamma_ratio(alpha, a):
    """``lnGamma(alpha + a) - lnGamma(alpha)`` for ``alpha > 0``, ``alpha + a > 0``.

    For large ``alpha`` the plain difference of log-gammas loses about
    ``log10(alpha ln alpha)`` digits, so above ``alpha = 50`` (with
    ``alpha + a`` also large) the Stirling expansion is differenced
    analytically instead.
    """
    alpha = np.asarray(alpha, dtype=float)
    a = np.asarray(a, dtype=float)
    if np.any(~(alpha > 0)) or np.any(~(alpha + a > 0)):
        raise DomainError("need alpha > 0 and alpha + a > 0")
    with np.errstate(all="ignore"):
        direct = special.gammaln(alpha + a) - special.gammaln(alpha)
        asym = (alpha + a - 0.5) * np.log1p(a / alpha) + a * (np.log(alpha) - 1.0) \
            + _stirling_tail(alpha + a) - _stirling_tail(alpha)
    big = (alpha > _RATIO_SWITCH) & (alpha + a > _RATIO_SWITCH)
    out = np.where(big, asym, direct)
    return out if out.ndim else float(out)


def gamma_cdf(x, a, lam=1.0):
    """Gamma(shape=a, rate=lam) cdf, i.e. the regularized lower incomplete gamma P(a, lam*x)."""
    _check_positive("a", a)
    _check_positive("lam", lam)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("x must be >= 0")
    out = special.gammainc(a, x * lam)
    return out if out.ndim else float(out)


def gamma_sf(x, a, lam=1.0):
    """Upper tail 1 - gamma_cdf, computed without cancellation."""
    _check_positive("a", a)
    _check_positive("lam", lam)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("x must be >= 0")
    out = special.gammaincc(a, x * lam)
    return out if out.ndim else float(out)


def gamma_pdf(x, a, lam=1.0):
    """Gamma(shape=a, rate=lam) density lam^a x^(a-1) exp(-lam x) / Gamma(a)."""
    _check_positive("a", a)
    _check_positive("lam", lam)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("x must be >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = special.xlogy(a, lam) + special.xlogy(a - 1.0, x) - lam * x - special.gammaln(a)
        out = np.exp(logp)
    # x == 0: density is 0 for a > 1, lam for a == 1, +inf for a < 1
    out = np.where(x == 0, np.where(np.asarray(a) > 1, 0.0, np.where(np.asarray(a) == 1, lam, np.inf)), out)
    return out if out.ndim else float(out)


def norm_cdf(z):
    """Standard normal cdf."""
    out = special.ndtr(z)
    return out if np.ndim(out) else float(out)


def norm_pdf(z):
    """Standard normal density."""
    z = np.asarray(z, dtype=float)
    out = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return out if out.ndim else float(out)


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Root of a continuous function on a sign-changing bracket.

    Brent's method (inverse quadratic interpolation with bisection
    safeguard). The returned point always lies in ``[lo, hi]``.

    Raises
    ------
    BracketError
        If ``f(lo)`` and ``f(hi)`` have the same strict sign.
    ConvergenceError
        If ``max_iter`` iterations do not reach ``tol``.
    """
    if lo > hi:
        lo, hi = hi, lo
    flo, fhi = f(lo), f(hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)):
        raise BracketError(f"non-finite function value at bracket ends ({flo}, {fhi})")
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})")
    try:
        x, info = optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                                  maxiter=max_iter, full_output=True, disp=False)
    except ValueError as exc:
        raise BracketError(str(exc)) from exc
    if not info.converged:
        raise ConvergenceError(f"root finder did not converge in {max_iter} iterations")
    return float(min(max(x, lo), hi))


def _quad(f, a, b, spec):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                                    limit=spec.max_subdivisions)
    return value, err


def integrate_semi_infinite(f: Callable[[float], float], spec: QuadratureSpec | None = None,
                            *, return_error: bool = False):
    """Integrate a decaying integrand over (0, inf).

    The integral is computed by adaptive Gauss-Kronrod panels on
    ``[0, W]`` with ``W = spec.truncation_omega``; the domain is then
    extended panel by panel (``[W, 2W]``, ``[2W, 4W]``, ...) while the
    newest panel contributes more than ``abs_tol``.

    Raises
    ------
    ConvergenceError
        If the accumulated quadrature error exceeds
        ``max(abs_tol, rel_tol * |I|)``.
    """
    spec = spec or QuadratureSpec()
    upper = spec.truncation_omega
    total, err = _quad(f, 0.0, upper, spec)
    for _ in range(spec.max_doublings):
        tail, tail_err = _quad(f, upper, 2.0 * upper, spec)
        total += tail
        err += tail_err
        upper *= 2.0
        if abs(tail) <= spec.abs_tol:
            break
    if not np.isfinite(total) or err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        raise ConvergenceError(f"quadrature error {err:.3g} above tolerance (value {total:.6g})")
    return (total, err) if return_error else total


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre_panels(upper: float, panel_width: float, order: int = 16):
    """Nodes and weights of a composite Gauss-Legendre rule on ``[0, upper]``.

    Used where one integrand is needed for many parameter values at once
    (a whole strike ladder or density grid), so adaptivity per point is
    wasteful.
    """
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    x, w = _GL_CACHE[order]
    n_panels = max(1, int(math.ceil(upper / panel_width)))
    edges = np.linspace(0.0, upper, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights
