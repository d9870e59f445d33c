import numpy as np

from app.lib.estimators.base import QGTMatrix
from app.lib.estimators.gradients import Shots, _map_scale
from app.lib.estimators.shots import as_sampler
from app.lib.sim.circuit import ParameterizedCircuit


def qgt_exact(circuit: ParameterizedCircuit, theta: np.ndarray) -> QGTMatrix:
    """Re(<d_i phi|d_j phi> - <d_i phi|phi><phi|d_j phi>)."""
    psi, derivatives = circuit.derivative_states(theta)
    overlaps = derivatives.conj() @ psi.amplitudes
    G = derivatives.conj() @ derivatives.T - np.outer(overlaps, overlaps.conj())
    g = np.real(G)
    return QGTMatrix(0.5 * (g + g.T))


def shifted_fidelities(circuit: ParameterizedCircuit, slots: np.ndarray) -> np.ndarray:
    """F(s, s + sigma_i e_i pi/2 + sigma_j e_j pi/2) for all slot pairs, shape (4, n, n).

    The leading axis runs over (++, +-, -+, --). Each doubly shifted state is a linear
    combination of |phi>, first derivatives and <phi|d_p d_q phi> = -<d_q phi|d_p phi>
    (p before q in gate order), so no shifted circuit is simulated.
    """
    psi, derivatives = circuit.slot_derivative_states(slots)
    a = derivatives @ psi.conj()
    S = derivatives.conj() @ derivatives.T
    order = circuit.slot_order()
    earlier = order[:, None] < order[None, :]
    cross = np.where(earlier, S.T, S)

    fidelities = np.empty((4, circuit.n_slots, circuit.n_slots))
    for index, (si, sj) in enumerate(((1, 1), (1, -1), (-1, 1), (-1, -1))):
        overlap = 0.5 * (1.0 + 2 * si * a[:, None] + 2 * sj * a[None, :] - 4 * si * sj * cross)
        fidelities[index] = np.abs(overlap) ** 2
    diagonal = np.arange(circuit.n_slots)
    double_shift = 4.0 * np.abs(a) ** 2
    fidelities[0, diagonal, diagonal] = double_shift
    fidelities[1, diagonal, diagonal] = 1.0
    fidelities[2, diagonal, diagonal] = 1.0
    fidelities[3, diagonal, diagonal] = double_shift
    return np.minimum(fidelities, 1.0)


def _mirror_upper(matrix: np.ndarray) -> np.ndarray:
    upper = np.triu(matrix)
    return upper + np.triu(matrix, 1).T


def qgt_psr(circuit: ParameterizedCircuit, theta: np.ndarray, shots: Shots = None) -> QGTMatrix:
    """g_ij = -(F++ - F+- - F-+ + F--)/8 with +/- pi/2 shifts on slots i and j."""
    sampler = as_sampler(shots)
    slots = circuit.slot_values(theta)
    fidelities = shifted_fidelities(circuit, slots)
    n = circuit.n_slots
    sampler.record(2 * n * (n + 1))
    sampled = np.asarray(sampler.binomial(fidelities))
    g_slots = -(sampled[0] - sampled[1] - sampled[2] + sampled[3]) / 8.0
    # Only i <= j is measured.
    g_slots = _mirror_upper(g_slots)
    return QGTMatrix(circuit.pull_back_matrix(g_slots))


def qgt_lcu(circuit: ParameterizedCircuit, theta: np.ndarray, shots: Shots = None) -> QGTMatrix:
    """Derivative-state QGT with Hadamard-test statistics on every entry."""
    sampler = as_sampler(shots)
    g = qgt_exact(circuit, theta).g
    d = circuit.d
    sampler.record(d * (d + 1) // 2 + 2 * d)
    if sampler.exact:
        return QGTMatrix(g)
    sampled = sampler.hadamard(g, 0.25 * _map_scale(circuit) ** 2)
    return QGTMatrix(_mirror_upper(sampled))
