from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from pydantic import BaseModel, ConfigDict, Field

from app.constants import Basis, DENSE_MAX_QUBITS, EvolutionMode, MAX_QUBITS, Topology
from app.constants.status import Status
from app.lib.exception import QTEException
from app.lib.sim.statevector import StateVector
from app.utils.logger import logger

# Above this size extreme eigenvalues come from a sparse Lanczos solve.
_SPARSE_EIGEN_QUBITS = 10


@dataclass(frozen=True)
class PauliString:
    """A weighted Pauli word; ``paulis[k]`` acts on qubit k."""

    paulis: str
    coefficient: float

    def __post_init__(self):
        if not self.paulis or set(self.paulis) - set("IXYZ"):
            raise QTEException(Status.INVALID_ARGUMENT, f"invalid Pauli word {self.paulis!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.paulis)

    @property
    def is_identity(self) -> bool:
        return set(self.paulis) == {"I"}

    @cached_property
    def masks(self) -> Tuple[int, int, int]:
        """(flip mask, phase mask, number of Y letters)."""
        x_mask = sum(1 << k for k, p in enumerate(self.paulis) if p in "XY")
        z_mask = sum(1 << k for k, p in enumerate(self.paulis) if p in "YZ")
        return x_mask, z_mask, self.paulis.count("Y")

    def action(self, dim: int) -> Tuple[np.ndarray, np.ndarray]:
        """Target indices and phases with P|x> = phase[x] |target[x]>."""
        x_mask, z_mask, n_y = self.masks
        index = np.arange(dim, dtype=np.int64)
        signs = 1 - 2 * (np.bitwise_count(index & z_mask) & 1)
        return index ^ x_mask, (1j ** n_y) * signs

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        """P applied to amplitude vectors (last axis)."""
        target, phase = self.action(amplitudes.shape[-1])
        out = np.empty_like(amplitudes, dtype=complex)
        out[..., target] = phase * amplitudes
        return out


@dataclass(frozen=True)
class PauliSum:
    terms: Tuple[PauliString, ...]

    def __post_init__(self):
        if not self.terms:
            raise QTEException(Status.INVALID_ARGUMENT, "a Pauli sum needs at least one term")
        sizes = {term.n_qubits for term in self.terms}
        if len(sizes) != 1:
            raise QTEException(Status.DIMENSION_MISMATCH, f"terms act on different qubit counts {sorted(sizes)}")
        if next(iter(sizes)) > MAX_QUBITS:
            raise QTEException(Status.SIZE_LIMIT, f"at most {MAX_QUBITS} qubits are supported")

    @classmethod
    def from_list(cls, terms: Sequence[Tuple[str, float]]) -> "PauliSum":
        return cls(tuple(PauliString(word, float(coeff)) for word, coeff in terms))

    @property
    def n_qubits(self) -> int:
        return self.terms[0].n_qubits

    @property
    def P(self) -> int:
        return len(self.terms)

    @property
    def measured_terms(self) -> int:
        """Terms that need a circuit; identity terms are constants."""
        return sum(1 for term in self.terms if not term.is_identity)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([term.coefficient for term in self.terms])

    @property
    def coefficient_bound(self) -> float:
        return float(np.abs(self.coefficients).sum())

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        out = np.zeros_like(amplitudes, dtype=complex)
        for term in self.terms:
            out += term.coefficient * term.apply(amplitudes)
        return out

    def term_expectations(self, amplitudes: np.ndarray) -> np.ndarray:
        """Real <psi|P_j|psi> for every term."""
        return np.array([np.vdot(amplitudes, term.apply(amplitudes)).real for term in self.terms])

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        dim = 2 ** self.n_qubits
        rows, cols, data = [], [], []
        columns = np.arange(dim)
        for term in self.terms:
            target, phase = term.action(dim)
            rows.append(target)
            cols.append(columns)
            data.append(term.coefficient * phase)
        matrix = scipy.sparse.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )
        return matrix.tocsr()

    def to_dense(self) -> np.ndarray:
        _check_dense(self.n_qubits)
        dim = 2 ** self.n_qubits
        matrix = np.zeros((dim, dim), dtype=complex)
        columns = np.arange(dim)
        for term in self.terms:
            target, phase = term.action(dim)
            matrix[target, columns] += term.coefficient * phase
        return matrix


class HeisenbergSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(default=12, ge=1, le=MAX_QUBITS)
    topology: Topology = Topology.CIRCLE
    J: float = 0.25
    g_field: float = -1.0


def heisenberg_edges(n: int, topology: Topology) -> List[Tuple[int, int]]:
    edges = [(i, i + 1) for i in range(n - 1)]
    # On two sites the closing bond repeats (0, 1) and is dropped.
    if topology == Topology.CIRCLE and n > 2:
        edges.append((n - 1, 0))
    return edges


def _word(n: int, letters: Dict[int, str]) -> str:
    return "".join(letters.get(k, "I") for k in range(n))


def heisenberg(spec: HeisenbergSpec) -> PauliSum:
    """J sum_<ij> (XX + YY + ZZ) + g_field sum_i Z_i."""
    if spec.n < 2:
        raise QTEException(Status.INVALID_ARGUMENT, f"the Heisenberg model needs at least 2 spins, got {spec.n}")
    terms = []
    for i, j in heisenberg_edges(spec.n, spec.topology):
        for letter in "XYZ":
            terms.append(PauliString(_word(spec.n, {i: letter, j: letter}), spec.J))
    for i in range(spec.n):
        terms.append(PauliString(_word(spec.n, {i: "Z"}), spec.g_field))
    return PauliSum(tuple(terms))


def single_qubit_sum(n: int, axis: Basis, coefficient: float = 1.0) -> PauliSum:
    return PauliSum(tuple(PauliString(_word(n, {i: axis.value}), coefficient) for i in range(n)))


def magnetization(n: int, axis: Basis) -> PauliSum:
    """(1/n) sum_i P_i."""
    return single_qubit_sum(n, axis, 1.0 / n)


def _check_dense(n_qubits: int):
    if n_qubits > DENSE_MAX_QUBITS:
        raise QTEException(
            Status.SIZE_LIMIT, f"dense operations are limited to {DENSE_MAX_QUBITS} qubits, got {n_qubits}"
        )


def _check_dims(H: PauliSum, psi: StateVector):
    if H.n_qubits != psi.n_qubits:
        raise QTEException(Status.DIMENSION_MISMATCH, f"{H.n_qubits}-qubit operator on a {psi.n_qubits}-qubit state")


def expectation(H: PauliSum, psi: StateVector) -> float:
    _check_dims(H, psi)
    value = np.vdot(psi.amplitudes, H.apply(psi.amplitudes))
    if abs(value.imag) > 1e-10 * max(1.0, H.coefficient_bound):
        raise QTEException(Status.NUMERICAL_ABORT, f"expectation value has imaginary part {value.imag:.3e}")
    return float(value.real)


def variance(H: PauliSum, psi: StateVector) -> float:
    """<H^2> - <H>^2 clamped at zero."""
    _check_dims(H, psi)
    h_psi = H.apply(psi.amplitudes)
    mean = np.vdot(psi.amplitudes, h_psi).real
    second = np.vdot(h_psi, h_psi).real
    return float(max(0.0, second - mean ** 2))


def energy_extremes(H: PauliSum, exact: Optional[bool] = None) -> Tuple[float, float]:
    """(E_min, E_max): exact eigenvalues up to the dense limit, else -/+ sum |c_i|."""
    if exact is None:
        exact = H.n_qubits <= DENSE_MAX_QUBITS
    if not exact:
        bound = H.coefficient_bound
        return -bound, bound
    _check_dense(H.n_qubits)
    if H.n_qubits <= _SPARSE_EIGEN_QUBITS:
        eigenvalues = scipy.linalg.eigvalsh(H.to_dense())
        return float(eigenvalues[0]), float(eigenvalues[-1])
    sparse = H.to_sparse()
    low = scipy.sparse.linalg.eigsh(sparse, k=1, which="SA", return_eigenvectors=False)
    high = scipy.sparse.linalg.eigsh(sparse, k=1, which="LA", return_eigenvectors=False)
    return float(low[0]), float(high[0])


class ExactPropagator:
    """Exact real/imaginary evolution from one Hermitian eigendecomposition of H."""

    def __init__(self, H: PauliSum):
        _check_dense(H.n_qubits)
        self.H = H
        self.eigenvalues, self.eigenvectors = scipy.linalg.eigh(H.to_dense())
        low, high = self.eigenvalues[0], self.eigenvalues[-1]
        logger.debug(f"diagonalized {H.n_qubits}-qubit Hamiltonian, spectrum [{low:.6f}, {high:.6f}]")

    def evolve(self, psi0: StateVector, t: float, mode: EvolutionMode) -> StateVector:
        _check_dims(self.H, psi0)
        coefficients = self.eigenvectors.conj().T @ psi0.amplitudes
        if mode == EvolutionMode.REAL:
            phases = np.exp(-1j * t * self.eigenvalues)
            return StateVector(psi0.n_qubits, self.eigenvectors @ (phases * coefficients)).normalized()
        if t < 0:
            raise QTEException(Status.INVALID_ARGUMENT, f"imaginary time must be non-negative, got {t}")
        # Shifting by E_min keeps the weights in (0, 1]; normalization removes the shift.
        weights = np.exp(-t * (self.eigenvalues - self.eigenvalues[0]))
        return StateVector(psi0.n_qubits, self.eigenvectors @ (weights * coefficients)).normalized()

    def trajectory(self, psi0: StateVector, times: Sequence[float], mode: EvolutionMode) -> List[StateVector]:
        return [self.evolve(psi0, t, mode) for t in times]

    def gibbs_average(self, observable: PauliSum, beta: float) -> float:
        """Tr(e^{-beta H} A) / Tr(e^{-beta H})."""
        weights = np.exp(-beta * (self.eigenvalues - self.eigenvalues[0]))
        a_dense = observable.to_dense()
        diagonal = np.einsum("ji,jk,ki->i", self.eigenvectors.conj(), a_dense, self.eigenvectors).real
        return float(np.dot(weights, diagonal) / weights.sum())


def exact_evolve(H: PauliSum, psi0: StateVector, t: float, mode: EvolutionMode) -> StateVector:
    return ExactPropagator(H).evolve(psi0, t, mode)
