"""Option pricing and risk-neutral densities under Black-Scholes, the
Generalized Gamma / Inverse Generalized Gamma scale families, and Heston
stochastic volatility, with MSE calibration and Monte-Carlo checks."""

from .bs import BSParams, LognormalRND, bs_call, bs_delta, implied_vol, lognormal_rnd
from .calibration import (
    CalibrationResult,
    calibrate,
    calibrate_all,
    calibrate_bs,
    calibrate_gg,
    calibrate_heston,
    calibrate_igg,
    golden_minimize,
    mse_objective,
    nelder_mead,
)
from .chain_io import OptionChain, Quote, RunConfig, load_chain, save_chain, synth_chain
from .errors import (
    BracketError,
    ChainError,
    ConvergenceError,
    DomainError,
    GGRNDError,
    InfeasibleError,
    MomentError,
)
from .gg import GGParams, gg_call, gg_skew_kurt, solve_shape
from .heston import (
    HestonParams,
    heston_call,
    heston_charfn,
    heston_delta,
    heston_density,
    heston_moments,
    heston_pj,
    heston_probabilities,
)
from .igg import IGGParams, igg_call, igg_skew_kurt, igg_solve_shape
from .mc import SimConfig, TerminalSample, histogram, sample_moments, simulate
from .rnd import (
    DensityCurve,
    MarketContext,
    StandardizedRND,
    call_price,
    delta,
    density_curve,
    put_price,
    strike_for_delta,
    undiscounted_delta,
)

__version__ = "0.1.0"
