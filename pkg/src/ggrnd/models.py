"""Uniform access to the four pricing models by string id.

Parameters travel as plain ``{name: value}`` mappings so they serialize to
JSON unchanged. ``sigma`` is always annualized.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .bs import BSParams, bs_call, bs_delta, lognormal_rnd
from .errors import DomainError
from .gg import GGParams, gg_call
from .heston import HestonParams, heston_call, heston_delta, heston_standardized_density
from .igg import IGGParams, igg_call
from .rnd import DensityCurve, MarketContext, delta as rnd_delta

__all__ = ["MODEL_IDS", "PARAM_NAMES", "build", "price", "delta", "standardized_density"]

MODEL_IDS = ("bs", "gg", "igg", "heston")

PARAM_NAMES = {
    "bs": ("sigma",),
    "gg": ("alpha", "sigma"),
    "igg": ("alpha", "sigma"),
    "heston": ("kappa", "theta", "eta", "rho", "v0"),
}


def _check(model, params):
    if model not in PARAM_NAMES:
        raise DomainError(f"unknown model {model!r}; expected one of {MODEL_IDS}")
    missing = [n for n in PARAM_NAMES[model] if n not in params]
    if missing:
        raise DomainError(f"{model} parameters missing {missing}")


def build(model: str, params: Mapping[str, float], ctx: MarketContext):
    """Model object for ``params``: BSParams, GGParams, IGGParams or HestonParams."""
    _check(model, params)
    p = {n: float(params[n]) for n in PARAM_NAMES[model]}
    if model == "bs":
        return BSParams(p["sigma"])
    if model == "gg":
        return GGParams.from_sigma(p["alpha"], p["sigma"], ctx.ttm_years)
    if model == "igg":
        return IGGParams.from_sigma(p["alpha"], p["sigma"], ctx.ttm_years)
    return HestonParams(**p)


def price(model: str, params, ctx: MarketContext, strikes) -> np.ndarray:
    obj = params if not isinstance(params, Mapping) else build(model, params, ctx)
    k = np.asarray(strikes, dtype=float)
    fn = {"bs": bs_call, "gg": gg_call, "igg": igg_call, "heston": heston_call}[model]
    return np.asarray(fn(ctx, k, obj), dtype=float)


def delta(model: str, params, ctx: MarketContext, strikes) -> np.ndarray:
    """Dividend-adjusted call delta per strike."""
    obj = params if not isinstance(params, Mapping) else build(model, params, ctx)
    k = np.asarray(strikes, dtype=float)
    if model == "bs":
        return np.asarray(bs_delta(ctx, k, obj))
    if model == "heston":
        return np.asarray(heston_delta(ctx, k, obj))
    return np.asarray(rnd_delta(obj, ctx, k))


def standardized_density(model: str, params, ctx: MarketContext, u_grid) -> DensityCurve:
    """Density of ``S_T / mu`` on ``u_grid``."""
    obj = params if not isinstance(params, Mapping) else build(model, params, ctx)
    u = np.asarray(u_grid, dtype=float)
    if model == "heston":
        return heston_standardized_density(ctx, obj, u)
    if model == "bs":
        obj = lognormal_rnd(obj.nu(ctx.ttm_years))
    return DensityCurve(u, np.asarray(obj.pdf(u), dtype=float))

