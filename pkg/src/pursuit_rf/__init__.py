"""Resolving-function pursuit in linear games with integral control constraints."""

__version__ = "0.1.0"

from .errors import PursuitError
from .game import (BudgetLedger, GameSpec, Projector, TerminalSet, budget_spend,
                   make_projector, projected_kernels)
from .resolving import (KernelF, NuEstimate, ResolvingSample, estimate_nu,
                        feasibility_margin, resolve_lambda_numeric, support_U)
from .evaders import EvaderSpec, make_evader
from .simulate import RunReport, Trajectory, monitor_invariants, run_pontryagin, run_simple_motion

__all__ = [
    "BudgetLedger", "EvaderSpec", "GameSpec", "KernelF", "NuEstimate", "Projector",
    "PursuitError", "ResolvingSample", "RunReport", "TerminalSet", "Trajectory",
    "budget_spend", "estimate_nu", "feasibility_margin", "make_evader", "make_projector",
    "monitor_invariants", "projected_kernels", "resolve_lambda_numeric", "run_pontryagin",
    "run_simple_motion", "support_U",
]
