from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.constants import GateKind, MAX_QUBITS, NORM_TOLERANCE
from app.constants.status import Status
from app.lib.exception import QTEException

_I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_DAGGER = np.array([[1, 0], [0, -1j]], dtype=complex)
CX_MATRIX = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]],
    dtype=complex,
)
ZZ_DIAGONAL = np.array([1, -1, -1, 1], dtype=complex)

GENERATORS = {
    GateKind.RX: PAULI_X,
    GateKind.RY: PAULI_Y,
    GateKind.RZ: PAULI_Z,
    GateKind.RZZ: np.diag(ZZ_DIAGONAL),
}


def rotation_matrix(kind: GateKind, angle: float) -> np.ndarray:
    """exp(-i angle P / 2) for the Pauli generator of ``kind``."""
    if kind == GateKind.RZZ:
        return np.diag(np.exp(-0.5j * angle * ZZ_DIAGONAL))
    if kind not in GENERATORS:
        raise QTEException(Status.INVALID_ARGUMENT, f"{kind} is not a rotation")
    return np.cos(angle / 2) * _I2 - 1j * np.sin(angle / 2) * GENERATORS[kind]


def gate_matrix(kind: GateKind, angle: float = 0.0) -> np.ndarray:
    if kind == GateKind.CX:
        return CX_MATRIX
    return rotation_matrix(kind, angle)


def apply_matrix(amplitudes: np.ndarray, n_qubits: int, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply a k-qubit matrix to ``targets``.

    The matrix acts on the ordered basis |x_{t0} x_{t1} ...> with ``targets[0]`` as the
    most significant bit; qubit q is bit q of the amplitude index.
    """
    k = len(targets)
    psi = amplitudes.reshape((2,) * n_qubits)
    axes = [n_qubits - 1 - q for q in targets]
    op = matrix.reshape((2,) * (2 * k))
    psi = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), axes))
    psi = np.moveaxis(psi, list(range(k)), axes)
    return psi.reshape(-1)


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_qubits > MAX_QUBITS:
            raise QTEException(Status.SIZE_LIMIT, f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.shape[0] != 2 ** self.n_qubits:
            raise QTEException(
                Status.DIMENSION_MISMATCH,
                f"expected {2 ** self.n_qubits} amplitudes for {self.n_qubits} qubits, got {self.amplitudes.shape[0]}",
            )

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amplitudes = np.zeros(2 ** n_qubits, dtype=complex)
        amplitudes[0] = 1.0
        return cls(n_qubits, amplitudes)

    @classmethod
    def from_amplitudes(cls, amplitudes: np.ndarray, normalize: bool = True) -> "StateVector":
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n_qubits = int(round(np.log2(amplitudes.shape[0])))
        state = cls(n_qubits, amplitudes)
        return state.normalized() if normalize else state

    @classmethod
    def product(cls, single_qubit_states: Sequence[np.ndarray]) -> "StateVector":
        """Tensor product; entry k of ``single_qubit_states`` is the state of qubit k."""
        amplitudes = np.array([1.0 + 0j])
        for local in single_qubit_states:
            amplitudes = np.kron(np.asarray(local, dtype=complex), amplitudes)
        return cls.from_amplitudes(amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        norm = self.norm()
        if norm == 0.0 or not np.isfinite(norm):
            raise QTEException(Status.NUMERICAL_ABORT, f"cannot normalize a state with norm {norm}")
        return StateVector(self.n_qubits, self.amplitudes / norm)

    def probabilities(self) -> np.ndarray:
        probs = np.abs(self.amplitudes) ** 2
        return probs / probs.sum()

    def apply(self, matrix: np.ndarray, targets: Sequence[int]) -> "StateVector":
        for q in targets:
            if q < 0 or q >= self.n_qubits:
                raise QTEException(Status.INVALID_ARGUMENT, f"target {q} out of range for {self.n_qubits} qubits")
        return StateVector(self.n_qubits, apply_matrix(self.amplitudes, self.n_qubits, matrix, targets))

    def is_normalized(self) -> bool:
        return abs(self.norm() - 1.0) <= NORM_TOLERANCE


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.n_qubits != b.n_qubits:
        raise QTEException(Status.DIMENSION_MISMATCH, f"inner product of {a.n_qubits}- and {b.n_qubits}-qubit states")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def state_fidelity(a: StateVector, b: StateVector) -> float:
    return float(min(1.0, abs(inner_product(a, b)) ** 2))
