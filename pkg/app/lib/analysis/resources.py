from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.constants import MethodTag
from app.constants.status import Status
from app.lib.evolution.base import Trajectory
from app.lib.exception import QTEException
from app.lib.sim import ParameterizedCircuit

_DUAL_METHODS = (MethodTag.DUALQITE_PSR, MethodTag.DUALQITE_LCU, MethodTag.DUALQRTE_LCU)
_SHIFT_METHODS = (MethodTag.VARQITE_PSR, MethodTag.DUALQITE_PSR)


def circuit_counts(method: MethodTag, d: int, P: int, K: Optional[int] = None) -> int:
    """Circuits per timestep for d differentiated parameters, P measured Hamiltonian terms and K descent iterations."""
    method = MethodTag(method)
    if d < 1 or P < 1:
        raise QTEException(Status.INVALID_ARGUMENT, f"need d, P >= 1, got d={d}, P={P}")
    if method in _DUAL_METHODS:
        if K is None or K < 1:
            raise QTEException(Status.INVALID_ARGUMENT, f"{method.value} needs an iteration count K >= 1")
        lcu = P * d + K * d
        return 2 * lcu if method == MethodTag.DUALQITE_PSR else lcu
    if method == MethodTag.VARQITE_PSR:
        return 2 * d * (d + P + 1)
    return d * (d + 5) // 2 + P * d


def evaluated_parameters(method: MethodTag, circuit: ParameterizedCircuit) -> int:
    """Width d the closed forms take: shift rules run once per gate occurrence, derivative states once per parameter."""
    return circuit.n_slots if MethodTag(method) in _SHIFT_METHODS else circuit.d


@dataclass
class ResourceLedger:
    method: MethodTag
    shots: Optional[int]
    circuits: List[int] = field(default_factory=list)
    iterations: List[int] = field(default_factory=list)

    @classmethod
    def from_trajectory(cls, trajectory: Trajectory) -> "ResourceLedger":
        return cls(
            method=trajectory.method,
            shots=trajectory.steps[0]["shots"] if trajectory.steps else None,
            circuits=[step["circuits"] for step in trajectory.steps],
            iterations=[step["iterations"] for step in trajectory.steps],
        )

    @property
    def measurements(self) -> List[int]:
        return [0 if self.shots is None else c * self.shots for c in self.circuits]

    @property
    def cumulative_N(self) -> np.ndarray:
        return np.cumsum(self.measurements, dtype=np.int64)

    @property
    def total_N(self) -> int:
        return int(sum(self.measurements))

    @property
    def total_circuits(self) -> int:
        return int(sum(self.circuits))

    def expected_circuits(self, d: int, P: int) -> List[int]:
        if self.method in _DUAL_METHODS:
            return [circuit_counts(self.method, d, P, k) for k in self.iterations]
        return [circuit_counts(self.method, d, P) for _ in self.circuits]

    def matches_closed_form(self, d: int, P: int) -> bool:
        return self.circuits == self.expected_circuits(d, P)
