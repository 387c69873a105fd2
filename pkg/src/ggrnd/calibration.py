"""Least-squares calibration of the pricing models to an option chain.

The objective is the plain mean squared price error
``(1/N) sum_i (C_model(K_i) - C_i)^2``. One-parameter fits use a
golden-section search; the others use a bounded Nelder-Mead simplex that
works on transformed coordinates (log for positive parameters, scaled
``tanh`` for intervals) so every trial point is admissible.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import models
from .bs import implied_vol
from .chain_io import OptionChain
from .errors import ChainError, ConvergenceError, DomainError, GGRNDError
from .gg import ALPHA_MAX
from .rnd import MarketContext

__all__ = [
    "CalibrationResult",
    "OptimizeResult",
    "mse_objective",
    "nelder_mead",
    "golden_minimize",
    "calibrate_bs",
    "calibrate_gg",
    "calibrate_igg",
    "calibrate_heston",
    "calibrate",
    "calibrate_all",
    "default_initial_params",
    "mse_table",
]

SIGMA_LO, SIGMA_HI = 1e-4, 5.0
HESTON_BOUNDS = {"kappa": (0.0, 100.0), "theta": (0.0, 4.0), "eta": (0.0, 2.0), "rho": (-1.0, 1.0)}
MAX_RESTARTS = 3


class OptimizeResult(NamedTuple):
    x: np.ndarray | float
    fun: float
    nit: int
    converged: bool


@dataclass
class CalibrationResult:
    model_id: str
    fitted_params: dict[str, float]
    mse: float
    per_strike_fit: list[tuple[float, float, float]]
    iterations: int
    converged: bool
    initial_params: dict[str, float] = field(default_factory=dict)

    @property
    def residuals(self) -> np.ndarray:
        fit = np.asarray(self.per_strike_fit, dtype=float).reshape(-1, 3)
        return fit[:, 2] - fit[:, 1]

    def to_dict(self):
        d = asdict(self)
        d["per_strike_fit"] = [list(map(float, row)) for row in self.per_strike_fit]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["per_strike_fit"] = [tuple(row) for row in d["per_strike_fit"]]
        return cls(**d)

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))


def _model_prices(model, params, chain, ctx):
    return models.price(model, params, ctx, chain.strikes)


def mse_objective(model: str, params, chain: OptionChain, ctx: MarketContext) -> float:
    """Mean squared price error; ``inf`` if the model cannot be evaluated at ``params``."""
    if len(chain) == 0:
        raise ChainError("chain is empty")
    try:
        with np.errstate(all="ignore"):
            fitted = _model_prices(model, params, chain, ctx)
    except (GGRNDError, ValueError, OverflowError, ZeroDivisionError):
        return math.inf
    r = fitted - chain.mids
    out = float(np.mean(r * r))
    return out if math.isfinite(out) else math.inf


# -- bounded coordinates -------------------------------------------------------

def _to_free(x, bounds):
    y = np.empty(len(x))
    for i, (xi, (lo, hi)) in enumerate(zip(x, bounds)):
        if lo is None and hi is None:
            y[i] = xi
        elif hi is None:
            y[i] = math.log(xi - lo)
        elif lo is None:
            y[i] = math.log(hi - xi)
        else:
            z = 2.0 * (xi - lo) / (hi - lo) - 1.0
            y[i] = math.atanh(min(max(z, -1 + 1e-12), 1 - 1e-12))
    return y


def _from_free(y, bounds):
    x = np.empty(len(y))
    for i, (yi, (lo, hi)) in enumerate(zip(y, bounds)):
        if lo is None and hi is None:
            x[i] = yi
        elif hi is None:
            x[i] = lo + math.exp(min(yi, 700.0))
        elif lo is None:
            x[i] = hi - math.exp(min(yi, 700.0))
        else:
            x[i] = lo + 0.5 * (hi - lo) * (1.0 + math.tanh(yi))
    return x


def nelder_mead(objective: Callable[[np.ndarray], float], x0, bounds=None, tol: float = 1e-12,
                max_iter: int = 5000, xtol: float = 1e-9, step: float = 0.1,
                rtol: float = 1e-10) -> OptimizeResult:
    """Minimize ``objective`` with the adaptive Nelder-Mead simplex.

    ``bounds`` is a sequence of ``(lo, hi)`` pairs, ``None`` meaning unbounded
    on that side; bounds are open. The search stops when the spread of the
    simplex values is below ``tol + rtol * |f_best|`` and its relative size
    is below ``xtol``. Running out of iterations sets ``converged=False`` and warns.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = x0.size
    bounds = [(None, None)] * n if bounds is None else list(bounds)
    if len(bounds) != n:
        raise DomainError("bounds must match x0")
    if not np.all(np.isfinite(x0)):
        raise DomainError("x0 must be finite")
    for xi, (lo, hi) in zip(x0, bounds):
        if (lo is not None and not xi > lo) or (hi is not None and not xi < hi):
            raise DomainError(f"x0 component {xi} outside bounds ({lo}, {hi})")

    def f(y):
        v = objective(_from_free(y, bounds))
        return v if np.isfinite(v) else math.inf

    # dimension-adapted coefficients help beyond two or three parameters
    a_r, a_e, a_c, a_s = 1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n if n > 1 else 0.5

    y0 = _to_free(x0, bounds)
    simplex = np.vstack([y0] + [y0 + step * np.eye(n)[i] for i in range(n)])
    fs = np.array([f(y) for y in simplex])
    if not np.isfinite(fs[0]):
        raise DomainError("objective is not finite at x0")

    nit = 0
    converged = False
    while nit < max_iter:
        order = np.argsort(fs, kind="stable")
        simplex, fs = simplex[order], fs[order]
        if fs[-1] - fs[0] <= tol + rtol * abs(fs[0]):
            # size measured in the original coordinates, so a simplex drifting
            # towards a bound (free coordinate -> inf) still counts as converged
            xs = np.array([_from_free(y, bounds) for y in simplex])
            if np.max(np.abs(xs[1:] - xs[0]) / (1.0 + np.abs(xs[0]))) <= xtol:
                converged = True
                break
        nit += 1
        centroid = simplex[:-1].mean(axis=0)
        yr = centroid + a_r * (centroid - simplex[-1])
        fr = f(yr)
        if fr < fs[0]:
            ye = centroid + a_e * (yr - centroid)
            fe = f(ye)
            simplex[-1], fs[-1] = (ye, fe) if fe < fr else (yr, fr)
            continue
        if fr < fs[-2]:
            simplex[-1], fs[-1] = yr, fr
            continue
        if fr < fs[-1]:
            yc = centroid + a_c * (yr - centroid)
            fc = f(yc)
            if fc <= fr:
                simplex[-1], fs[-1] = yc, fc
                continue
        else:
            yc = centroid - a_c * (centroid - simplex[-1])
            fc = f(yc)
            if fc < fs[-1]:
                simplex[-1], fs[-1] = yc, fc
                continue
        simplex[1:] = simplex[0] + a_s * (simplex[1:] - simplex[0])
        fs[1:] = [f(y) for y in simplex[1:]]

    best = int(np.argmin(fs))
    if not converged:
        warnings.warn(f"nelder_mead stopped after {max_iter} iterations", RuntimeWarning, stacklevel=2)
    return OptimizeResult(_from_free(simplex[best], bounds), float(fs[best]), nit, converged)


INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_minimize(objective: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10,
                    max_iter: int = 500) -> OptimizeResult:
    """Golden-section search for a minimum of a unimodal function on ``[lo, hi]``.

    The endpoints are compared with the interior result at the end, so a
    minimum on the boundary returns that endpoint.
    """
    if not lo < hi:
        raise DomainError("need lo < hi")
    a, b = float(lo), float(hi)
    c, d = b - INV_PHI * (b - a), a + INV_PHI * (b - a)
    fc, fd = objective(c), objective(d)
    nit = 0
    while b - a > tol and nit < max_iter:
        nit += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = objective(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    for e in (float(lo), float(hi)):
        fe = objective(e)
        if fe < fx:
            x, fx = e, fe
    return OptimizeResult(x, float(fx), nit, b - a <= tol)


# -- per-model calibration -----------------------------------------------------

def _result(model, params, chain, ctx, nit, converged, initial):
    fitted = _model_prices(model, params, chain, ctx)
    k, mids = chain.strikes, chain.mids
    rows = [(float(a), float(b), float(c)) for a, b, c in zip(k, mids, fitted)]
    r = np.array([c - b for _, b, c in rows])
    return CalibrationResult(model, {n: float(v) for n, v in params.items()}, float(np.mean(r * r)),
                             rows, int(nit), bool(converged), dict(initial))


def _require(chain, n_min=3):
    if len(chain) < n_min:
        raise ChainError(f"calibration needs at least {n_min} strikes, got {len(chain)}")


def calibrate_bs(chain: OptionChain, ctx: MarketContext, sigma0: float | None = None,
                 tol: float = 1e-10) -> CalibrationResult:
    """Single-volatility fit: a log-spaced scan of ``[1e-4, 5]`` then golden refinement."""
    _require(chain)
    if sigma0 is not None and not SIGMA_LO <= sigma0 <= SIGMA_HI:
        raise DomainError(f"sigma0 must lie in [{SIGMA_LO}, {SIGMA_HI}]")

    def obj(s):
        return mse_objective("bs", {"sigma": s}, chain, ctx)

    grid = np.geomspace(SIGMA_LO, SIGMA_HI, 121)
    if sigma0 is not None:
        grid = np.unique(np.append(grid, sigma0))
    vals = np.array([obj(s) for s in grid])
    i = int(np.argmin(vals))
    res = golden_minimize(obj, grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)], tol=tol)
    return _result("bs", {"sigma": res.x}, chain, ctx, res.nit, res.converged,
                   {"sigma": float(sigma0) if sigma0 is not None else float(grid[i])})


def _calibrate_simplex(model, names, bounds, x0, chain, ctx, fixed=None, tol=1e-14, xtol=1e-9,
                       max_iter=4000, restarts=MAX_RESTARTS, seed=0):
    fixed = fixed or {}

    def obj(x):
        return mse_objective(model, {**dict(zip(names, x)), **fixed}, chain, ctx)

    if not math.isfinite(obj(np.asarray(x0))):
        raise DomainError(f"{model} objective is not finite at the initial parameters {dict(zip(names, x0))}")
    rng = np.random.default_rng(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        best = nelder_mead(obj, x0, bounds, tol=tol, max_iter=max_iter, xtol=xtol)
        nit = best.nit
        # restart from the best point: the simplex often stalls on curved valleys
        for _ in range(restarts):
            y = _to_free(np.asarray(best.x), bounds) + rng.normal(0.0, 0.05, len(names)) * (not best.converged)
            start = _from_free(y, bounds)
            if not math.isfinite(obj(start)):
                start = best.x
            trial = nelder_mead(obj, start, bounds, tol=tol, max_iter=max_iter, xtol=xtol)
            nit += trial.nit
            improved = trial.fun < best.fun - tol
            if trial.fun <= best.fun:
                best = trial
            if best.converged and not improved:
                break
    params = {**dict(zip(names, best.x)), **fixed}
    return params, nit, best.converged


def _check_alpha_sigma(alpha0, sigma0):
    if not (alpha0 > 0 and sigma0 > 0):
        raise DomainError(f"initial alpha and sigma must be > 0, got alpha={alpha0}, sigma={sigma0}")


def calibrate_gg(chain: OptionChain, ctx: MarketContext, alpha0: float = 0.5, sigma0: float = 0.2,
                 tol: float = 1e-14, max_iter: int = 4000) -> CalibrationResult:
    """Fit ``(alpha, sigma)`` of the GG RND."""
    _require(chain)
    _check_alpha_sigma(alpha0, sigma0)
    bounds = [(0.0, ALPHA_MAX), (0.0, None)]
    params, nit, ok = _calibrate_simplex("gg", ("alpha", "sigma"), bounds, [alpha0, sigma0], chain, ctx,
                                         tol=tol, max_iter=max_iter)
    return _result("gg", params, chain, ctx, nit, ok, {"alpha": alpha0, "sigma": sigma0})


def calibrate_igg(chain: OptionChain, ctx: MarketContext, alpha0: float = 5.0, sigma0: float = 0.2,
                  tol: float = 1e-14, max_iter: int = 4000) -> CalibrationResult:
    """Fit ``(alpha, sigma)`` of the IGG RND; the start must admit a shape root."""
    _require(chain)
    _check_alpha_sigma(alpha0, sigma0)
    models.build("igg", {"alpha": alpha0, "sigma": sigma0}, ctx)  # raises if infeasible
    bounds = [(0.0, ALPHA_MAX), (0.0, None)]
    params, nit, ok = _calibrate_simplex("igg", ("alpha", "sigma"), bounds, [alpha0, sigma0], chain, ctx,
                                         tol=tol, max_iter=max_iter)
    return _result("igg", params, chain, ctx, nit, ok, {"alpha": alpha0, "sigma": sigma0})


def calibrate_heston(chain: OptionChain, ctx: MarketContext, theta0, fit_v0: bool = False,
                     eta_max: float = 2.0, tol: float = 1e-12, xtol: float = 1e-6,
                     max_iter: int = 3000) -> CalibrationResult:
    """Fit ``(kappa, theta, eta, rho)`` with ``v0`` held at its initial value.

    ``theta0`` is a :class:`HestonParams` or a mapping with all five fields.
    Set ``fit_v0`` to free ``v0`` as a fifth parameter on ``(0, 4]``.
    """
    _require(chain)
    p0 = theta0.as_dict() if hasattr(theta0, "as_dict") else {n: float(theta0[n]) for n in models.PARAM_NAMES["heston"]}
    models.build("heston", p0, ctx)  # validates the start
    bounds_map = dict(HESTON_BOUNDS, eta=(0.0, float(eta_max)))
    names = ["kappa", "theta", "eta", "rho"] + (["v0"] if fit_v0 else [])
    bounds_map["v0"] = (0.0, 4.0)
    bounds = [bounds_map[n] for n in names]
    x0 = []
    for n, (lo, hi) in zip(names, bounds):
        v = p0[n]
        if not lo < v <= hi:
            raise DomainError(f"initial {n}={v} outside ({lo}, {hi}]")
        # closed upper bounds: nudge a start sitting on the bound inside
        x0.append(min(v, hi - 1e-9 * (hi - lo)))
    fixed = {} if fit_v0 else {"v0": p0["v0"]}
    params, nit, ok = _calibrate_simplex("heston", names, bounds, x0, chain, ctx, fixed=fixed,
                                         tol=tol, xtol=xtol, max_iter=max_iter)
    params = {n: params[n] for n in models.PARAM_NAMES["heston"]}
    return _result("heston", params, chain, ctx, nit, ok, p0)


def default_initial_params(chain: OptionChain, ctx: MarketContext) -> dict[str, dict[str, float]]:
    """Starting values: the chain's ATM implied volatility where a volatility is needed.

    Uses the quoted IV nearest the money, or else the BS implied volatility
    of the nearest-the-money mid.
    """
    iv = chain.atm_iv(ctx.spot)
    if iv is None or not iv > 0:
        q = chain.atm_quote(ctx.spot)
        try:
            iv = implied_vol(ctx, q.strike, q.call_mid)
        except (DomainError, ConvergenceError):
            iv = 0.2
    return {
        "bs": {"sigma": iv},
        "gg": {"alpha": 0.5, "sigma": iv},
        "igg": {"alpha": 5.0, "sigma": iv},
        "heston": {"kappa": 15.0, "theta": 0.01, "eta": 0.1, "rho": -0.65, "v0": iv * iv},
    }


def calibrate(model: str, chain: OptionChain, ctx: MarketContext, initial=None, **kw) -> CalibrationResult:
    """Dispatch to the per-model routine; missing initial values come from :func:`default_initial_params`."""
    if model not in models.MODEL_IDS:
        raise DomainError(f"unknown model {model!r}")
    init = dict(default_initial_params(chain, ctx)[model])
    init.update(initial or {})
    if model == "bs":
        return calibrate_bs(chain, ctx, init["sigma"], **kw)
    if model == "gg":
        return calibrate_gg(chain, ctx, init["alpha"], init["sigma"], **kw)
    if model == "igg":
        return calibrate_igg(chain, ctx, init["alpha"], init["sigma"], **kw)
    return calibrate_heston(chain, ctx, init, **kw)


def calibrate_all(chain: OptionChain, ctx: MarketContext, model_ids: Sequence[str] = ("bs", "gg", "heston"),
                  initial_params=None) -> dict:
    """Calibrate each model; a failing model maps to its exception instead of a result."""
    initial_params = initial_params or {}
    out = {}
    for m in model_ids:
        try:
            out[m] = calibrate(m, chain, ctx, initial_params.get(m))
        except GGRNDError as exc:
            out[m] = exc
    return out


def mse_table(results: dict) -> list[dict]:
    """One row per model: id, mse (None on failure), and the mse relative to the best model."""
    ok = {m: r.mse for m, r in results.items() if isinstance(r, CalibrationResult)}
    best = min(ok.values()) if ok else math.nan
    rows = []
    for m, r in results.items():
        if isinstance(r, CalibrationResult):
            rows.append({"model_id": m, "mse": r.mse, "ratio_to_best": r.mse / best if best > 0 else math.nan,
                         "converged": r.converged})
        else:
            rows.append({"model_id": m, "mse": None, "ratio_to_best": None, "error": str(r)})
    return rows
