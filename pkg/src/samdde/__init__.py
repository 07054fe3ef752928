"""Averaged integration of fast-forced, constant-delay ODE systems at whole-period sample times."""

from .benchmarks import ToggleParams, scaled_toggle_problem, synthetic_quadrature_problem, toggle_problem
from .oscproblem import CaseInfo, CaseKind, OscDDEProblem, classify_case
from .reference import (
    endpoint_error,
    max_strobo_error,
    observed_order,
    reference_solve,
    reference_with_floor,
)
from .sam import SAMConfig, StroboscopicSolution, solve, solve_case1, solve_case2, validity_check
from .stencil import Stencil, StencilSchedule, builtin_schedules, derive_weights
from .tableau import ButcherTableau, rk2_midpoint, rk3_heun, rk4_classical, rk_step

__version__ = "0.1.0"
