from .base import TimeEvolver, Trajectory, check_time_grid, make_record, step_count
from .dualqte import (
    DualConfig,
    DualQTE,
    StepSolution,
    check_delta_tau_feasibility,
    dual_loss,
    dual_loss_gradient,
    dualqte_evolve,
    solve_step,
)
from .regularization import RegularizationPolicy, l_curve_select, menger_curvature, solve_update, solve_update_with_info
from .varqte import EvolutionConfig, VarQTE, method_tag_for, varqte_evolve

__all__ = [
    "DualConfig",
    "DualQTE",
    "EvolutionConfig",
    "RegularizationPolicy",
    "StepSolution",
    "TimeEvolver",
    "Trajectory",
    "VarQTE",
    "check_delta_tau_feasibility",
    "check_time_grid",
    "dual_loss",
    "dual_loss_gradient",
    "dualqte_evolve",
    "l_curve_select",
    "make_record",
    "menger_curvature",
    "method_tag_for",
    "solve_step",
    "solve_update",
    "solve_update_with_info",
    "step_count",
    "varqte_evolve",
]
