from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.constants import NEGATIVE_CLAMP_TOLERANCE
from app.constants.status import Status
from app.lib.analysis.metrics import bures_series, exact_reference
from app.lib.estimators import evolution_gradient_b_real, qgt_exact
from app.lib.evolution.base import Trajectory
from app.lib.exception import QTEException
from app.lib.hamiltonian import PauliSum, variance
from app.lib.sim import ParameterizedCircuit
from app.utils.logger import logger


def _clamp_rate(rate: float) -> float:
    if rate < -NEGATIVE_CLAMP_TOLERANCE:
        logger.warning(f"negative error rate {rate:.3e} clamped to zero")
    return max(0.0, rate)


def varqrte_error_rate(theta, theta_dot, circuit: ParameterizedCircuit, H: PauliSum) -> float:
    """||sum_k theta_dot_k |d_k phi> + iH|phi>||^2 = Var(H) + theta_dot.g.theta_dot - 2 theta_dot.b"""
    theta = np.asarray(theta, dtype=float)
    theta_dot = np.asarray(theta_dot, dtype=float)
    g = qgt_exact(circuit, theta).g
    b = evolution_gradient_b_real(circuit, theta, H).values
    rate = variance(H, circuit.run(theta)) + float(theta_dot @ g @ theta_dot) - 2.0 * float(theta_dot @ b)
    return _clamp_rate(rate)


def dual_error_rate(
    theta, delta_theta, delta_tau: float, circuit: ParameterizedCircuit, H: PauliSum, loss_value: float
) -> float:
    """Var(H) + 2 L / delta_tau^2, biased by O(delta_tau)."""
    rate = variance(H, circuit.run(np.asarray(theta, dtype=float))) + 2.0 * loss_value / delta_tau ** 2
    return _clamp_rate(rate)


def integrate_error_bound(rates, dt: float, rates_are_squared: bool = False) -> np.ndarray:
    """Left-endpoint cumulative integral, one entry per grid time starting at 0.

    By default the rates are integrated as given. With ``rates_are_squared`` the rates
    are squared residual norms and their square roots are integrated, which is the form
    every run summary and error_bounds table reports.
    """
    rates = np.asarray(rates, dtype=float)
    if np.any(rates < -NEGATIVE_CLAMP_TOLERANCE):
        raise QTEException(Status.INVALID_ARGUMENT, f"negative error rate {rates.min():.3e}")
    rates = np.clip(rates, 0.0, None)
    if rates_are_squared:
        rates = np.sqrt(rates)
    return np.concatenate([[0.0], np.cumsum(rates * dt)])


@dataclass
class ErrorBoundSeries:
    times: np.ndarray
    rates: np.ndarray
    cumulative: np.ndarray
    realized: Optional[np.ndarray] = None

    def __post_init__(self):
        if np.any(np.diff(self.cumulative) < 0):
            raise QTEException(Status.NUMERICAL_ABORT, "cumulative error bound decreased")

    def holds(self, tolerance: float = 1e-9) -> bool:
        if self.realized is None:
            return True
        return bool(np.all(self.cumulative + tolerance >= self.realized))


def trajectory_error_bounds(
    trajectory: Trajectory,
    circuit: ParameterizedCircuit,
    H: PauliSum,
    delta_tau: Optional[float] = None,
) -> ErrorBoundSeries:
    """Instantaneous rates along a real-time run and their integral next to the realized D_B.

    Rates are squared residual norms; the cumulative bound integrates their square roots.
    Dual runs (``delta_tau`` given) use the recorded final loss of each step.
    """
    rates = []
    for theta, step in zip(trajectory.thetas, trajectory.steps):
        if delta_tau is None:
            rates.append(varqrte_error_rate(theta, step["theta_dot"], circuit, H))
        else:
            rates.append(dual_error_rate(theta, step["delta_theta"], delta_tau, circuit, H, step["final_loss"]))
    rates = np.asarray(rates)
    cumulative = integrate_error_bound(rates, trajectory.dt, rates_are_squared=True)
    realized = bures_series(trajectory, exact_reference(trajectory, circuit, H), circuit)
    return ErrorBoundSeries(np.asarray(trajectory.times), rates, cumulative, realized)


def _check_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise QTEException(Status.INVALID_ARGUMENT, f"{name} must be positive, got {value}")


def sample_bound_varqte(d: int, E_max: float, dt: float, delta_c: float, eps_s: float) -> float:
    """d^3 E_max^2 dt^2 / (delta_c^4 eps_s^2), unit constant (order of magnitude only)."""
    _check_positive(d=d, E_max=E_max, dt=dt, delta_c=delta_c, eps_s=eps_s)
    return d ** 3 * E_max ** 2 * dt ** 2 / (delta_c ** 4 * eps_s ** 2)


def sample_bound_dual(d: int, K: int, dt: float, delta_tau: float, E_max: float, eps_s: float) -> float:
    """d^2 K^2 dt^2 / (delta_tau^2 eps_s^2) (1/delta_tau + E_max)^2, unit constant."""
    _check_positive(d=d, K=K, dt=dt, delta_tau=delta_tau, E_max=E_max, eps_s=eps_s)
    return d ** 2 * K ** 2 * dt ** 2 / (delta_tau ** 2 * eps_s ** 2) * (1.0 / delta_tau + E_max) ** 2


@dataclass
class SpectrumCheck:
    max_eigenvalue: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.max_eigenvalue <= self.bound + 1e-9


def qgt_spectrum_check(g) -> SpectrumCheck:
    """Largest QGT eigenvalue against d/4."""
    g = np.asarray(g, dtype=float)
    check = SpectrumCheck(float(np.linalg.eigvalsh(g)[-1]), g.shape[0] / 4.0)
    if not check.ok:
        logger.warning(f"QGT eigenvalue {check.max_eigenvalue:.6f} exceeds d/4 = {check.bound}")
    return check


def sample_bound_ratio(d: int, K: int, dt: float, delta_tau: float, delta_c: float, E_max: float, eps_s: float):
    """Dual over VarQTE sample bound for one configuration."""
    return sample_bound_dual(d, K, dt, delta_tau, E_max, eps_s) / sample_bound_varqte(d, E_max, dt, delta_c, eps_s)
