import math
from typing import List, Sequence

import numpy as np
from scipy.integrate import trapezoid

from app.constants.status import Status
from app.lib.evolution.base import Trajectory
from app.lib.exception import QTEException
from app.lib.hamiltonian import ExactPropagator, PauliSum
from app.lib.sim import ParameterizedCircuit, StateVector, inner_product


def bures_distance(psi: StateVector, phi: StateVector) -> float:
    """sqrt(2 (1 - |<psi|phi>|)), in [0, sqrt(2)]."""
    overlap = min(1.0, abs(inner_product(psi, phi)))
    return math.sqrt(max(0.0, 2.0 * (1.0 - overlap)))


def exact_reference(trajectory: Trajectory, circuit: ParameterizedCircuit, H: PauliSum) -> List[StateVector]:
    """Exact evolution of the initial variational state on the trajectory's time grid."""
    psi0 = circuit.run(trajectory.thetas[0])
    return ExactPropagator(H).trajectory(psi0, trajectory.times, trajectory.mode)


def bures_series(
    trajectory: Trajectory, reference: Sequence[StateVector], circuit: ParameterizedCircuit
) -> np.ndarray:
    if len(reference) != len(trajectory.times):
        raise QTEException(
            Status.DIMENSION_MISMATCH,
            f"reference has {len(reference)} states for {len(trajectory.times)} grid times",
        )
    return np.array([bures_distance(circuit.run(theta), ref) for theta, ref in zip(trajectory.thetas, reference)])


def integrated_bures(
    trajectory: Trajectory, reference: Sequence[StateVector], circuit: ParameterizedCircuit
) -> float:
    """Time-averaged Bures distance to the exact solution (trapezoid rule)."""
    distances = bures_series(trajectory, reference, circuit)
    if trajectory.T == 0.0:
        return float(distances[0])
    return float(trapezoid(distances, trajectory.times) / trajectory.T)
