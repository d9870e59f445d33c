from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from app.constants import TIME_GRID_TOLERANCE, EvolutionMode, MethodTag
from app.constants.status import Status
from app.lib.estimators.shots import ShotConfig, ShotSampler
from app.lib.exception import QTEException
from app.lib.hamiltonian import PauliSum
from app.lib.sim.circuit import ParameterizedCircuit
from app.types import StepRecord
from app.utils.logger import logger


def step_count(dt: float, T: float) -> int:
    return int(round(T / dt))


def check_time_grid(dt: float, T: float):
    """0 < dt <= T (or T = 0) and T/dt an integer up to TIME_GRID_TOLERANCE relative error."""
    if dt <= 0 or T < 0 or (T > 0 and dt > T):
        raise ValueError(f"need 0 < dt <= T, got dt={dt}, T={T}")
    ratio = T / dt
    if abs(ratio - round(ratio)) > TIME_GRID_TOLERANCE * max(1.0, ratio):
        raise ValueError(f"T/dt = {ratio} is not an integer number of steps")


@dataclass
class Trajectory:
    mode: EvolutionMode
    method: MethodTag
    dt: float
    times: List[float] = field(default_factory=list)
    thetas: List[np.ndarray] = field(default_factory=list)
    steps: List[StepRecord] = field(default_factory=list)

    @property
    def T(self) -> float:
        return self.times[-1] if self.times else 0.0

    @property
    def final_theta(self) -> np.ndarray:
        return self.thetas[-1]

    @property
    def theta_matrix(self) -> np.ndarray:
        return np.vstack(self.thetas)

    @property
    def total_circuits(self) -> int:
        return sum(step["circuits"] for step in self.steps)

    @property
    def total_measurements(self) -> int:
        return sum(step["measurements"] for step in self.steps)


class TimeEvolver(ABC):
    """Forward-Euler driver; subclasses provide the parameter derivative of one step."""

    def __init__(self, circuit: ParameterizedCircuit, H: PauliSum, mode: EvolutionMode, dt: float, T: float,
                 shots: ShotConfig):
        if circuit.n_qubits != H.n_qubits:
            raise QTEException(
                Status.DIMENSION_MISMATCH, f"{H.n_qubits}-qubit Hamiltonian on a {circuit.n_qubits}-qubit circuit"
            )
        self.circuit = circuit
        self.H = H
        self.mode = mode
        self.dt = dt
        self.T = T
        self.shots = shots

    @property
    @abstractmethod
    def method_tag(self) -> MethodTag:
        pass

    @abstractmethod
    def step(self, theta: np.ndarray, index: int, sampler: ShotSampler) -> Tuple[np.ndarray, StepRecord]:
        """Return theta_dot at ``theta`` and the bookkeeping of the step."""
        pass

    def evolve(self, theta0: np.ndarray) -> Trajectory:
        theta = np.asarray(theta0, dtype=float).copy()
        if theta.shape[0] != self.circuit.d:
            raise QTEException(Status.DIMENSION_MISMATCH, f"expected {self.circuit.d} parameters, got {theta.shape[0]}")
        n_steps = step_count(self.dt, self.T)
        trajectory = Trajectory(mode=self.mode, method=self.method_tag, dt=self.dt, times=[0.0], thetas=[theta.copy()])
        sampler = ShotSampler(self.shots)
        logger.info(
            f"{self.method_tag.value}: d={self.circuit.d}, P={self.H.P}, steps={n_steps}, dt={self.dt}, "
            f"shots={self.shots.shots}"
        )
        for index in range(n_steps):
            try:
                theta_dot, record = self.step(theta, index, sampler)
            except QTEException as exc:
                logger.error(f"{self.method_tag.value}: step {index} failed: {exc.msg}")
                if exc.partial is None:
                    exc.partial = trajectory
                raise
            if not np.all(np.isfinite(theta_dot)):
                logger.error(f"{self.method_tag.value}: non-finite parameter derivative at step {index}")
                raise QTEException(
                    Status.NUMERICAL_ABORT,
                    f"non-finite parameter derivative at step {index} (t={index * self.dt:.4f})",
                    partial=trajectory,
                )
            theta = theta + self.dt * theta_dot
            trajectory.steps.append(record)
            trajectory.times.append((index + 1) * self.dt)
            trajectory.thetas.append(theta.copy())
            logger.debug(
                f"step {index}: t={(index + 1) * self.dt:.4f} circuits={record['circuits']} "
                f"iterations={record['iterations']} |b|={record['b_norm']:.4e}"
            )
        logger.info(
            f"{self.method_tag.value}: finished {n_steps} steps, {trajectory.total_circuits} circuits, "
            f"N={trajectory.total_measurements}"
        )
        return trajectory


def make_record(index: int, dt: float, circuits: int, shots: Optional[int], iterations: int, b_norm: float,
                theta_dot: np.ndarray) -> StepRecord:
    return StepRecord(
        step=index,
        time=index * dt,
        circuits=int(circuits),
        shots=shots,
        measurements=0 if shots is None else int(circuits) * int(shots),
        iterations=int(iterations),
        b_norm=float(b_norm),
        theta_dot=[float(x) for x in theta_dot],
    )
