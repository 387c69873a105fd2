"""
Where the 25-delta strikes sit
==============================
"""

# %%
from ggrnd import GGParams, IGGParams, MarketContext, lognormal_rnd, strike_for_delta

ctx = MarketContext.from_dte(445.92, 0.0016, 0.0123, 63)
t = ctx.ttm_years
rnds = {
    "lognormal": lognormal_rnd(0.137348 * t**0.5),
    "gg": GGParams.from_sigma(0.1554312, 0.1483843, t),
    "igg": IGGParams.from_sigma(5.0, 0.14, t),
}

# %% put delta is the call delta minus e^{-lt}
for name, rnd in rnds.items():
    c = strike_for_delta(rnd, ctx, 0.25, "call")
    p = strike_for_delta(rnd, ctx, -0.25, "put")
    print(f"{name:>9s}  put {p:7.2f}  call {c:7.2f}  width {c - p:6.2f}")
