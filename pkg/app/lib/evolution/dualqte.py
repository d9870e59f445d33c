import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from app.constants import EvolutionMode, MethodTag
from app.constants.status import Status
from app.lib.estimators import (
    GradientMethod,
    ShotConfig,
    ShotSampler,
    as_sampler,
    evolution_gradient,
    fidelity,
    fidelity_gradient,
    gradient_values,
)
from app.lib.estimators.gradients import Shots
from app.lib.evolution.base import TimeEvolver, Trajectory, check_time_grid, make_record
from app.lib.evolution.varqte import default_gradient_method, method_tag_for
from app.lib.exception import QTEException
from app.lib.hamiltonian import PauliSum
from app.lib.sim.circuit import ParameterizedCircuit
from app.types import FeasibilityReport, StepRecord
from app.utils.logger import logger


class DualConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: EvolutionMode = EvolutionMode.IMAGINARY
    dt: float = 0.01
    T: float = 1.0
    delta_tau: float = Field(default=0.01, gt=0)
    eta: float = Field(default=0.1, gt=0)
    K0: PositiveInt = 100
    K_warm: PositiveInt = 10
    warm_start: bool = True
    shots: ShotConfig = Field(default_factory=ShotConfig)
    gradient_method: GradientMethod
    # Exact-mode stopping rule |L_k - L_{k-1}| < tolerance, capped at max_iterations.
    tolerance: Optional[float] = Field(default=None, gt=0)
    max_iterations: PositiveInt = 1000

    @model_validator(mode="before")
    @classmethod
    def _fill_gradient_method(cls, data):
        return default_gradient_method(data)

    @model_validator(mode="after")
    def _check(self):
        check_time_grid(self.dt, self.T)
        if self.K_warm > self.K0:
            raise ValueError(f"K_warm={self.K_warm} exceeds K0={self.K0}")
        if self.tolerance is not None and not self.shots.exact:
            raise ValueError("the loss tolerance stopping rule needs exact expectation values")
        return self


@dataclass
class StepSolution:
    delta_theta: np.ndarray
    loss_trace: List[float] = field(default_factory=list)
    gradient_norm_trace: List[float] = field(default_factory=list)
    measurements_used: int = 0
    circuits_used: int = 0
    final_loss: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.loss_trace)


def _check_lengths(circuit: ParameterizedCircuit, delta_theta: np.ndarray, theta: np.ndarray, b: np.ndarray):
    d = circuit.d
    if delta_theta.shape[0] != d or theta.shape[0] != d or b.shape[0] != d:
        raise QTEException(
            Status.DIMENSION_MISMATCH,
            f"expected length {d}, got delta_theta={delta_theta.shape[0]}, theta={theta.shape[0]}, b={b.shape[0]}",
        )


def dual_loss(delta_theta, theta, b, delta_tau: float, circuit: ParameterizedCircuit, shots: Shots = None) -> float:
    """(1 - F(theta, theta + delta_theta))/2 - delta_tau * delta_theta . b"""
    delta_theta = np.asarray(delta_theta, dtype=float)
    theta = np.asarray(theta, dtype=float)
    b = gradient_values(b)
    _check_lengths(circuit, delta_theta, theta, b)
    F = fidelity(circuit, theta, theta + delta_theta, shots)
    return 0.5 * (1.0 - F) - delta_tau * float(delta_theta @ b)


def dual_loss_gradient(
    delta_theta,
    theta,
    b,
    delta_tau: float,
    circuit: ParameterizedCircuit,
    shots: Shots = None,
    method: Optional[GradientMethod] = None,
) -> np.ndarray:
    delta_theta = np.asarray(delta_theta, dtype=float)
    theta = np.asarray(theta, dtype=float)
    b = gradient_values(b)
    _check_lengths(circuit, delta_theta, theta, b)
    grad_F = fidelity_gradient(circuit, theta, delta_theta, method or GradientMethod.psr(), shots)
    return -0.5 * np.asarray(grad_F, dtype=float) - delta_tau * b


def check_delta_tau_feasibility(b, delta_tau: float) -> FeasibilityReport:
    """Each component needs delta_tau <= 1/(4|b_i|) for the loss minimum to exist."""
    magnitudes = np.abs(gradient_values(b))
    with np.errstate(divide="ignore"):
        limits = np.where(magnitudes > 0, 1.0 / (4.0 * magnitudes), np.inf)
    violations = [int(i) for i in np.flatnonzero(delta_tau > limits)]
    max_feasible = float(limits.min()) if limits.size else math.inf
    if violations:
        logger.warning(
            f"delta_tau={delta_tau} infeasible for components {violations} (max feasible {max_feasible:.4g})"
        )
    return FeasibilityReport(ok=not violations, violations=violations, max_feasible=max_feasible)


def solve_step(
    circuit: ParameterizedCircuit,
    theta,
    b,
    config: DualConfig,
    init: Optional[np.ndarray] = None,
    sampler: Optional[ShotSampler] = None,
) -> StepSolution:
    """Fixed-rate gradient descent on the dual loss.

    Runs K0 iterations from zero, K_warm from ``init``. The loss trace is the exact loss
    before each update and is not billed to the sampler.
    """
    sampler = sampler or as_sampler(config.shots)
    theta = np.asarray(theta, dtype=float)
    b = gradient_values(b)
    delta_theta = np.zeros(circuit.d) if init is None else np.asarray(init, dtype=float).copy()
    if config.tolerance is not None:
        limit = config.max_iterations
    else:
        limit = config.K0 if init is None else config.K_warm

    start = sampler.circuits
    solution = StepSolution(delta_theta=delta_theta)
    for k in range(limit):
        loss = dual_loss(delta_theta, theta, b, config.delta_tau, circuit)
        if not math.isfinite(loss):
            raise QTEException(Status.NUMERICAL_ABORT, f"non-finite dual loss at iteration {k}", partial=solution)
        if config.tolerance is not None and k > 0 and abs(loss - solution.loss_trace[-1]) < config.tolerance:
            break
        gradient = dual_loss_gradient(
            delta_theta, theta, b, config.delta_tau, circuit, sampler, config.gradient_method
        )
        if not np.all(np.isfinite(gradient)):
            raise QTEException(
                Status.NUMERICAL_ABORT, f"non-finite dual loss gradient at iteration {k}", partial=solution
            )
        solution.loss_trace.append(loss)
        solution.gradient_norm_trace.append(float(np.linalg.norm(gradient)))
        delta_theta = delta_theta - config.eta * gradient

    solution.delta_theta = delta_theta
    solution.final_loss = dual_loss(delta_theta, theta, b, config.delta_tau, circuit)
    solution.circuits_used = sampler.circuits - start
    solution.measurements_used = 0 if sampler.exact else solution.circuits_used * sampler.shots
    if sampler.exact and np.any(np.diff(solution.loss_trace + [solution.final_loss]) > 1e-12):
        logger.warning(f"dual loss increased during descent (eta={config.eta})")
    return solution


class DualQTE(TimeEvolver):
    """QGT-free evolution: each step minimizes the dual loss and moves by dt * delta_theta / delta_tau."""

    def __init__(self, circuit: ParameterizedCircuit, H: PauliSum, config: DualConfig):
        super().__init__(circuit, H, config.mode, config.dt, config.T, config.shots)
        self.config = config
        self._tag = method_tag_for(config.mode, config.gradient_method, dual=True)
        self._previous: Optional[np.ndarray] = None

    @property
    def method_tag(self) -> MethodTag:
        return self._tag

    def step(self, theta: np.ndarray, index: int, sampler: ShotSampler) -> Tuple[np.ndarray, StepRecord]:
        if index == 0:
            self._previous = None
        start = sampler.circuits
        b = evolution_gradient(self.circuit, theta, self.H, self.mode, self.config.gradient_method, sampler)
        check_delta_tau_feasibility(b, self.config.delta_tau)
        init = self._previous if self.config.warm_start else None
        solution = solve_step(self.circuit, theta, b, self.config, init=init, sampler=sampler)
        self._previous = solution.delta_theta
        theta_dot = solution.delta_theta / self.config.delta_tau
        record = make_record(
            index, self.dt, sampler.circuits - start, sampler.shots, solution.iterations, b.norm(), theta_dot
        )
        record["loss_trace"] = solution.loss_trace
        record["gradient_norm_trace"] = solution.gradient_norm_trace
        record["delta_theta"] = [float(x) for x in solution.delta_theta]
        record["final_loss"] = solution.final_loss
        return theta_dot, record


def dualqte_evolve(circuit: ParameterizedCircuit, H: PauliSum, theta0: np.ndarray, config: DualConfig) -> Trajectory:
    return DualQTE(circuit, H, config).evolve(theta0)
