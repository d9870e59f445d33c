import math
from typing import Union

import numpy as np

from app.constants import DEFAULT_SHIFT, EvolutionMode, GradientKind
from app.constants.status import Status
from app.lib.estimators.base import EvolutionGradient, GradientMethod
from app.lib.estimators.shots import ShotConfig, ShotSampler, as_sampler
from app.lib.exception import QTEException
from app.lib.hamiltonian import PauliSum
from app.lib.sim.circuit import ParameterizedCircuit
from app.lib.sim.statevector import StateVector

Shots = Union[ShotConfig, ShotSampler, None]


def _check_hamiltonian(circuit: ParameterizedCircuit, H: PauliSum):
    if circuit.n_qubits != H.n_qubits:
        raise QTEException(
            Status.DIMENSION_MISMATCH, f"{H.n_qubits}-qubit Hamiltonian on a {circuit.n_qubits}-qubit circuit"
        )


def _check_psr(circuit: ParameterizedCircuit, method: GradientMethod):
    if method.method == GradientKind.PARAMETER_SHIFT and not circuit.parameter_shift_compatible:
        raise QTEException(Status.INCOMPATIBLE_METHOD, "parameter shift needs Pauli-rotation parameter gates")


def _map_scale(circuit: ParameterizedCircuit) -> float:
    """Largest number of slots one parameter drives, weighted by coefficients."""
    if circuit.parameter_map is None:
        return 1.0
    return float(np.abs(circuit.parameter_map).sum(axis=0).max())


def sample_terms(term_values: np.ndarray, H: PauliSum, sampler: ShotSampler) -> np.ndarray:
    """Energies from per-term expectations, each term measured with its own circuit.

    ``term_values`` has the terms on its last axis.
    """
    values = np.asarray(term_values, dtype=float)
    if sampler.exact:
        return values @ H.coefficients
    measured = np.array([not term.is_identity for term in H.terms])
    estimates = values.copy()
    p = np.clip((1.0 + values[..., measured]) / 2.0, 0.0, 1.0)
    estimates[..., measured] = 2.0 * sampler.binomial(p) - 1.0
    return estimates @ H.coefficients


def expectation_estimate(psi: StateVector, H: PauliSum, shots: Shots = None) -> float:
    """<psi|H|psi> under the per-term shot model."""
    sampler = as_sampler(shots)
    if psi.n_qubits != H.n_qubits:
        raise QTEException(Status.DIMENSION_MISMATCH, f"{H.n_qubits}-qubit operator on a {psi.n_qubits}-qubit state")
    sampler.record(H.measured_terms)
    return float(sample_terms(H.term_expectations(psi.amplitudes), H, sampler))


def energy(circuit: ParameterizedCircuit, theta: np.ndarray, H: PauliSum, shots: Shots = None) -> float:
    _check_hamiltonian(circuit, H)
    return expectation_estimate(circuit.run(theta), H, shots)


def fidelity(circuit: ParameterizedCircuit, theta_a: np.ndarray, theta_b: np.ndarray, shots: Shots = None) -> float:
    """|<phi(theta_a)|phi(theta_b)>|^2 with compute-uncompute statistics."""
    sampler = as_sampler(shots)
    value = abs(np.vdot(circuit.run(theta_a).amplitudes, circuit.run(theta_b).amplitudes)) ** 2
    sampler.record(1)
    return float(sampler.binomial(min(1.0, value)))


def _shifted_term_expectations(circuit: ParameterizedCircuit, slots: np.ndarray, H: PauliSum, shift: float):
    """Per-term expectations at slots +/- shift e_k, shapes (n_slots, P).

    A shifted Pauli rotation gives cos(s/2)|phi> +/- 2 sin(s/2)|d_k phi>, so both
    shifted states follow from a single derivative sweep.
    """
    psi, derivatives = circuit.slot_derivative_states(slots)
    c, t = math.cos(shift / 2), 2.0 * math.sin(shift / 2)
    base = H.term_expectations(psi)
    plus = np.empty((circuit.n_slots, H.P))
    minus = np.empty((circuit.n_slots, H.P))
    for j, term in enumerate(H.terms):
        cross = np.real(derivatives @ term.apply(psi).conj())
        self_term = np.real(np.sum(derivatives.conj() * term.apply(derivatives), axis=1))
        plus[:, j] = c * c * base[j] + 2 * c * t * cross + t * t * self_term
        minus[:, j] = c * c * base[j] - 2 * c * t * cross + t * t * self_term
    return plus, minus


def energy_gradient_b_imag(
    circuit: ParameterizedCircuit,
    theta: np.ndarray,
    H: PauliSum,
    method: GradientMethod,
    shots: Shots = None,
) -> EvolutionGradient:
    """b^I = -grad E / 2."""
    _check_hamiltonian(circuit, H)
    _check_psr(circuit, method)
    sampler = as_sampler(shots)
    if method.method == GradientKind.PARAMETER_SHIFT:
        slots = circuit.slot_values(theta)
        plus, minus = _shifted_term_expectations(circuit, slots, H, method.shift)
        sampler.record(2 * H.measured_terms * circuit.n_slots)
        energy_plus = sample_terms(plus, H, sampler)
        energy_minus = sample_terms(minus, H, sampler)
        grad_slots = (energy_plus - energy_minus) / (2.0 * math.sin(method.shift))
        return EvolutionGradient(-0.5 * circuit.pull_back(grad_slots), EvolutionMode.IMAGINARY)

    psi, derivatives = circuit.derivative_states(theta)
    exact = -np.real(derivatives.conj() @ H.apply(psi.amplitudes))
    sampler.record(H.measured_terms * circuit.d)
    scale = max(1.0, H.coefficient_bound) * _map_scale(circuit)
    return EvolutionGradient(sampler.hadamard(exact, scale), EvolutionMode.IMAGINARY)


def evolution_gradient_b_real(
    circuit: ParameterizedCircuit,
    theta: np.ndarray,
    H: PauliSum,
    shots: Shots = None,
) -> EvolutionGradient:
    """b^R_i = Im(<d_i phi|H|phi> - <d_i phi|phi> E)."""
    _check_hamiltonian(circuit, H)
    sampler = as_sampler(shots)
    psi, derivatives = circuit.derivative_states(theta)
    h_psi = H.apply(psi.amplitudes)
    e = np.vdot(psi.amplitudes, h_psi).real
    exact = np.imag(derivatives.conj() @ h_psi - (derivatives.conj() @ psi.amplitudes) * e)
    sampler.record(H.measured_terms * circuit.d)
    scale = max(1.0, H.coefficient_bound) * _map_scale(circuit)
    return EvolutionGradient(sampler.hadamard(exact, scale), EvolutionMode.REAL)


def evolution_gradient(
    circuit: ParameterizedCircuit,
    theta: np.ndarray,
    H: PauliSum,
    mode: EvolutionMode,
    method: GradientMethod,
    shots: Shots = None,
) -> EvolutionGradient:
    if mode == EvolutionMode.IMAGINARY:
        return energy_gradient_b_imag(circuit, theta, H, method, shots)
    if method.method != GradientKind.DERIVATIVE_STATE:
        raise QTEException(
            Status.INCOMPATIBLE_METHOD, "real-time evolution gradients need the LCU derivative-state method"
        )
    return evolution_gradient_b_real(circuit, theta, H, shots)


def fidelity_gradient_psr(
    circuit: ParameterizedCircuit,
    theta: np.ndarray,
    delta_theta: np.ndarray,
    shots: Shots = None,
    shift: float = DEFAULT_SHIFT,
) -> np.ndarray:
    """d F(theta, theta + delta_theta) / d delta_theta by the shift rule."""
    if not circuit.parameter_shift_compatible:
        raise QTEException(Status.INCOMPATIBLE_METHOD, "parameter shift needs Pauli-rotation parameter gates")
    sampler = as_sampler(shots)
    theta = np.asarray(theta, dtype=float)
    bra = circuit.run(theta).amplitudes
    slots_b = circuit.slot_values(theta + np.asarray(delta_theta, dtype=float))
    plus, minus = circuit.shifted_overlaps(bra, slots_b, shift)
    sampler.record(2 * circuit.n_slots)
    f_plus = sampler.binomial(np.minimum(1.0, np.abs(plus) ** 2))
    f_minus = sampler.binomial(np.minimum(1.0, np.abs(minus) ** 2))
    return circuit.pull_back((np.asarray(f_plus) - np.asarray(f_minus)) / (2.0 * math.sin(shift)))


def fidelity_gradient_lcu(
    circuit: ParameterizedCircuit,
    theta: np.ndarray,
    delta_theta: np.ndarray,
    shots: Shots = None,
) -> np.ndarray:
    """Fidelity gradient from derivative states with Hadamard-test statistics."""
    sampler = as_sampler(shots)
    theta = np.asarray(theta, dtype=float)
    bra = circuit.run(theta).amplitudes
    ket, derivatives = circuit.derivative_states(theta + np.asarray(delta_theta, dtype=float))
    overlap = np.vdot(bra, ket.amplitudes)
    exact = 2.0 * np.real(np.conj(overlap) * (derivatives @ bra.conj()))
    sampler.record(circuit.d)
    return sampler.hadamard(exact, 0.5 * _map_scale(circuit))


def fidelity_gradient(
    circuit: ParameterizedCircuit,
    theta: np.ndarray,
    delta_theta: np.ndarray,
    method: GradientMethod,
    shots: Shots = None,
) -> np.ndarray:
    if method.method == GradientKind.PARAMETER_SHIFT:
        return fidelity_gradient_psr(circuit, theta, delta_theta, shots, method.shift)
    return fidelity_gradient_lcu(circuit, theta, delta_theta, shots)
