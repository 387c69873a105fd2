"""
Standardized densities side by side
===================================

The GG, IGG and lognormal densities of S* = S_T / mu, all with unit mean
and the same variance, plus the Heston density at a skewed parameter set.
"""

# %%
import numpy as np

from ggrnd import GGParams, HestonParams, IGGParams, MarketContext, lognormal_rnd
from ggrnd.heston import heston_moments, heston_standardized_density

ctx = MarketContext.from_dte(445.92, 0.0016, 0.0123, 63)
sigma = 0.15
nu = sigma * np.sqrt(ctx.ttm_years)

# %% same variance, different shapes
densities = {
    "lognormal": lognormal_rnd(nu),
    "gg a=0.16": GGParams.from_sigma(0.16, sigma, ctx.ttm_years),
    "gg a=5": GGParams.from_sigma(5.0, sigma, ctx.ttm_years),
    "igg a=5": IGGParams.from_sigma(5.0, sigma, ctx.ttm_years),
}
for name, rnd in densities.items():
    skew, kurt = rnd.skew_kurt()
    print(f"{name:>10s}  skew={skew:+.4f}  excess kurtosis={kurt:.4f}")

# %% small alpha bends the GG to the left; the IGG always leans right
u = np.linspace(0.8, 1.2, 9)
print("u      " + "  ".join(f"{x:7.3f}" for x in u))
for name, rnd in densities.items():
    print(f"{name:>10s} " + " ".join(f"{q:7.3f}" for q in rnd.pdf(u)))

# %% heston with strong negative correlation
hs = HestonParams(kappa=15.03, theta=0.0279, eta=2.0, rho=-0.775, v0=0.1615**2)
curve = heston_standardized_density(ctx, hs, np.linspace(0.5, 1.5, 2001))
print("heston mass on [0.5, 1.5]:", round(curve.integral(), 6))
print("heston exact moments (mean, var, skew, exkurt):", np.round(heston_moments(ctx, hs), 5))

# %% plotting is optional
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    grid = np.linspace(0.7, 1.25, 600)
    for name, rnd in densities.items():
        plt.plot(grid, rnd.pdf(grid), label=name)
    plt.plot(curve.x, curve.density, "k--", label="heston")
    plt.xlim(0.7, 1.25)
    plt.legend()
    plt.savefig("densities.png", dpi=120)
