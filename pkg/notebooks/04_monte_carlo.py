"""
Simulated terminal prices against the Fourier density
=====================================================
"""

# %%
import numpy as np

from ggrnd import HestonParams, MarketContext
from ggrnd.heston import heston_call, heston_moments
from ggrnd.mc import SimConfig, discounted_payoff_mean, histogram, sample_moments, simulate

ctx = MarketContext.from_dte(445.92, 0.0016, 0.0123, 63)
hs = HestonParams(kappa=15.03132587, theta=0.02793781, eta=2.0, rho=-0.7746947, v0=0.1615**2)
print("feller ratio", round(hs.feller_ratio, 3))

# %% both schemes at the default four steps per day
ladder = np.array([420.0, 435.0, 445.0, 455.0, 470.0])
exact = heston_call(ctx, ladder, hs)
for scheme in ("milstein", "euler"):
    s = simulate(ctx, hs, SimConfig(paths=30000, seed=1, scheme=scheme))
    mc, se = discounted_payoff_mean(s, ctx, ladder)
    print(scheme, "z-scores", np.round((mc - exact) / se, 2), "mean V_T", round(s.v_t.mean(), 5))

# %% exact E[V_T] for comparison
t = ctx.ttm_years
print("exact E[V_T]", round(hs.theta + (hs.v0 - hs.theta) * np.exp(-hs.kappa * t), 5))

# %% moments of S*
s = simulate(ctx, hs, SimConfig(paths=30000, seed=1, scheme="euler"))
print("sample ", sample_moments(s))
print("exact  ", heston_moments(ctx, hs))
print(histogram(s, bins=10))
