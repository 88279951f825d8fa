"""Randomized (regularized, extended) Kaczmarz solvers for tensor t-product systems."""
from .objectives import elastic_net_objective, frobenius_objective
from .solvers import RunResult, SolverConfig, default_stepsizes, run, theoretical_rates
from .spectral import pinv_apply, sigma_min_nonzero, spectral_norm
from .tensor import identity_tensor, tprod, transpose

__version__ = "0.1.0"

__all__ = [
    "RunResult",
    "SolverConfig",
    "default_stepsizes",
    "elastic_net_objective",
    "frobenius_objective",
    "identity_tensor",
    "pinv_apply",
    "run",
    "sigma_min_nonzero",
    "spectral_norm",
    "theoretical_rates",
    "tprod",
    "transpose",
]
