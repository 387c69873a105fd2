"""
Call prices and deltas under four models
========================================
"""

# %%
import numpy as np

from ggrnd import MarketContext, models

ctx = MarketContext.from_dte(445.92, 0.0016, 0.0123, 63)
params = {
    "bs": {"sigma": 0.137348},
    "gg": {"alpha": 0.1554312, "sigma": 0.1483843},
    "igg": {"alpha": 5.0, "sigma": 0.14},
    "heston": {"kappa": 15.03132587, "theta": 0.02793781, "eta": 2.0, "rho": -0.7746947, "v0": 0.1615**2},
}
strikes = np.array([400.0, 425.0, 445.0, 465.0, 490.0])

# %% prices
print("strike  " + "  ".join(f"{m:>9s}" for m in params))
table = {m: models.price(m, p, ctx, strikes) for m, p in params.items()}
for i, k in enumerate(strikes):
    print(f"{k:6.0f}  " + "  ".join(f"{table[m][i]:9.4f}" for m in params))

# %% deltas carry the e^{-lt} dividend factor
deltas = {m: models.delta(m, p, ctx, strikes) for m, p in params.items()}
for i, k in enumerate(strikes):
    print(f"{k:6.0f}  " + "  ".join(f"{deltas[m][i]:9.4f}" for m in params))
print("dividend factor e^{-lt} =", round(ctx.div_discount, 6))

# %% a negatively skewed density gives a fatter ITM delta at the money
atm = models.delta("gg", params["gg"], ctx, [445.0])[0] / ctx.div_discount
print("gg undiscounted ATM delta:", round(atm, 4))
