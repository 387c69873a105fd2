"""
Fitting models to a synthetic chain
===================================

A chain is generated from a skewed Heston model, quote noise added,
and each model fitted by least squares on prices.
"""

# %%
import numpy as np

from ggrnd import MarketContext
from ggrnd.calibration import calibrate_all, mse_table
from ggrnd.chain_io import synth_chain

ctx = MarketContext.from_dte(445.92, 0.0016, 0.0123, 63)
truth = {"kappa": 15.03132587, "theta": 0.02793781, "eta": 2.0, "rho": -0.7746947, "v0": 0.1615**2}
chain = synth_chain("heston", truth, ctx, np.arange(380.0, 492.0, 2.0), noise=0.01, seed=3)
print(len(chain), "quotes")

# %% v0 starts from the squared ATM implied vol and stays there
init = {"heston": {"kappa": 15.0, "theta": 0.01, "eta": 0.1, "rho": -0.65, "v0": truth["v0"]}}
results = calibrate_all(chain, ctx, ("bs", "gg", "igg", "heston"), init)
for row in mse_table(results):
    print(row)

# %%
for m, r in results.items():
    print(m, {k: round(v, 5) for k, v in r.fitted_params.items()})

# %% the residual pattern of BS is the smile it cannot produce
res = results["bs"].residuals
print("bs residuals, wings vs centre:", res[:3].round(3), res[len(res) // 2 - 1:len(res) // 2 + 2].round(3), res[-3:].round(3))
