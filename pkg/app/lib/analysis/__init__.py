from .benchmarks import (
    delta_tau_scaling,
    grad_norm_trace,
    gradient_norm_scaling,
    illustrative_circuit,
    illustrative_loss_curve,
    loglog_slope,
    product_state_diagnostic,
    warm_start_study,
)
from .bounds import (
    ErrorBoundSeries,
    SpectrumCheck,
    dual_error_rate,
    integrate_error_bound,
    qgt_spectrum_check,
    sample_bound_dual,
    sample_bound_ratio,
    sample_bound_varqte,
    trajectory_error_bounds,
    varqrte_error_rate,
)
from .metrics import bures_distance, bures_series, exact_reference, integrated_bures
from .resources import ResourceLedger, circuit_counts, evaluated_parameters
from .runtime import DeviceTimings, projected_measurements, runtime_estimate, runtime_table, shot_time_ns

__all__ = [
    "DeviceTimings",
    "ErrorBoundSeries",
    "ResourceLedger",
    "SpectrumCheck",
    "bures_distance",
    "bures_series",
    "circuit_counts",
    "delta_tau_scaling",
    "dual_error_rate",
    "evaluated_parameters",
    "exact_reference",
    "grad_norm_trace",
    "gradient_norm_scaling",
    "illustrative_circuit",
    "illustrative_loss_curve",
    "integrate_error_bound",
    "integrated_bures",
    "loglog_slope",
    "product_state_diagnostic",
    "projected_measurements",
    "qgt_spectrum_check",
    "runtime_estimate",
    "runtime_table",
    "sample_bound_dual",
    "sample_bound_ratio",
    "sample_bound_varqte",
    "shot_time_ns",
    "trajectory_error_bounds",
    "varqrte_error_rate",
    "warm_start_study",
]
