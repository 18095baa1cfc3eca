"""Joint user pairing and power allocation for untrusted NOMA downlinks."""

from .errors import (
    ConvergenceError,
    InfeasibleLPError,
    LineSearchError,
    SingularMatrixError,
    SolverError,
)
from .optimizer import OptimizeParams, Solution, optimize
from .pairing_lp import BarrierParams, barrier_solve, build_lp
from .power_alloc import PairAllocation, calibrate_dual, epa_allocation
from .rate_model import OrderedPair, secrecy_rate
from .rounding import Pairing, greedy_round
from .scenario import Scenario, SystemConfig, load_config, sample_scenario

__version__ = "0.1.0"

__all__ = [
    "BarrierParams",
    "ConvergenceError",
    "InfeasibleLPError",
    "LineSearchError",
    "OptimizeParams",
    "OrderedPair",
    "PairAllocation",
    "Pairing",
    "Scenario",
    "SingularMatrixError",
    "Solution",
    "SolverError",
    "SystemConfig",
    "barrier_solve",
    "build_lp",
    "calibrate_dual",
    "epa_allocation",
    "greedy_round",
    "load_config",
    "optimize",
    "sample_scenario",
    "secrecy_rate",
]
