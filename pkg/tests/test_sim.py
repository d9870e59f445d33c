import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from app.constants import AnsatzFamily, Basis, Entangler, GateKind, InitialState
from app.constants.status import Status
from app.lib.exception import QTEException
from app.lib.metts import product_state
from app.lib.sim import (
    AnsatzSpec,
    Gate,
    ParameterizedCircuit,
    StateVector,
    build_ansatz,
    initial_parameter_binding,
    state_fidelity,
)


def ry_state(angle):
    return np.array([math.cos(angle / 2), math.sin(angle / 2)], dtype=complex)


def test_zero_state_is_normalized():
    psi = StateVector.zero(3)
    assert psi.is_normalized()
    assert psi.amplitudes[0] == 1.0


def test_state_size_limit():
    with pytest.raises(QTEException) as exc:
        StateVector.zero(21)
    assert exc.value.code == Status.SIZE_LIMIT


def test_amplitude_count_must_match():
    with pytest.raises(QTEException) as exc:
        StateVector(2, np.ones(3))
    assert exc.value.code == Status.DIMENSION_MISMATCH


def test_qubit_zero_is_least_significant():
    circuit = ParameterizedCircuit.from_gates(2, [Gate(GateKind.RY, (0,), 0), Gate(GateKind.RY, (1,), 1)])
    a, b = 0.3, 1.1
    expected = np.kron(ry_state(b), ry_state(a))
    assert_allclose(circuit.run(np.array([a, b])).amplitudes, expected, atol=1e-12)


def test_cx_uses_first_target_as_control():
    circuit = ParameterizedCircuit.from_gates(2, [Gate(GateKind.RX, (0,), 0), Gate(GateKind.CX, (0, 1))])
    psi = circuit.run(np.array([math.pi]))
    assert abs(psi.amplitudes[3]) == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=1, max_value=5), r=st.integers(min_value=0, max_value=3))
def test_efficient_su2_parameter_count(n, r):
    circuit = build_ansatz(AnsatzSpec(n_qubits=n, repetitions=r))
    assert circuit.d == 2 * n * (r + 1)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=1, max_value=5), r=st.integers(min_value=0, max_value=3))
def test_alternating_xy_parameter_count(n, r):
    spec = AnsatzSpec(n_qubits=n, repetitions=r, family=AnsatzFamily.ALTERNATING_XY, entangler=Entangler.CHAIN_RZZ)
    assert build_ansatz(spec).d == n * (r + 1) + (n - 1) * r


def test_alternating_xy_layer_sequence():
    spec = AnsatzSpec(n_qubits=4, repetitions=3, family=AnsatzFamily.ALTERNATING_XY, entangler=Entangler.CHAIN_RZZ)
    kinds = build_ansatz(spec).gate_kinds()
    expected = ["RX"] * 4 + ["RZZ"] * 3 + ["RY"] * 4 + ["RZZ"] * 3 + ["RX"] * 4 + ["RZZ"] * 3 + ["RY"] * 4
    assert kinds == expected


def test_efficient_su2_layer_sequence():
    kinds = build_ansatz(AnsatzSpec(n_qubits=4, repetitions=1)).gate_kinds()
    assert kinds == ["RY"] * 4 + ["RZ"] * 4 + ["CX"] * 3 + ["RY"] * 4 + ["RZ"] * 4


def test_unsupported_family_entangler_combination():
    spec = AnsatzSpec(n_qubits=3, entangler=Entangler.CHAIN_RZZ)
    with pytest.raises(QTEException) as exc:
        build_ansatz(spec)
    assert exc.value.code == Status.UNSUPPORTED_ANSATZ


def test_gate_arity_is_checked():
    with pytest.raises(QTEException) as exc:
        Gate(GateKind.RZZ, (0,), 0)
    assert exc.value.code == Status.INVALID_ARGUMENT


def test_parameter_count_mismatch():
    circuit = build_ansatz(AnsatzSpec(n_qubits=2, repetitions=1))
    with pytest.raises(QTEException) as exc:
        circuit.run(np.zeros(circuit.d + 1))
    assert exc.value.code == Status.DIMENSION_MISMATCH


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_circuits_preserve_norm(seed):
    circuit = build_ansatz(AnsatzSpec(n_qubits=3, repetitions=2))
    theta = np.random.default_rng(seed).uniform(-math.pi, math.pi, circuit.d)
    assert circuit.run(theta).is_normalized()


def test_plus_all_binding():
    circuit = build_ansatz(AnsatzSpec(n_qubits=3, repetitions=1))
    psi = circuit.run(initial_parameter_binding(circuit, InitialState.PLUS_ALL))
    assert_allclose(psi.amplitudes, np.full(8, 1 / math.sqrt(8)), atol=1e-12)


@pytest.mark.parametrize(
    "basis,rot_pair,outcome",
    [
        (Basis.X, (GateKind.RY, GateKind.RZ), "0110"),
        (Basis.Y, (GateKind.RX, GateKind.RZ), "1001"),
        (Basis.Z, (GateKind.RY, GateKind.RZ), "0011"),
        (Basis.Z, (GateKind.RX, GateKind.RZ), "1010"),
    ],
)
def test_product_binding_prepares_eigenstates(basis, rot_pair, outcome):
    circuit = build_ansatz(AnsatzSpec(n_qubits=4, repetitions=2, rot_pair=rot_pair))
    theta = initial_parameter_binding(circuit, InitialState.PRODUCT, basis, outcome)
    assert state_fidelity(circuit.run(theta), product_state(basis, outcome)) == pytest.approx(1.0, abs=1e-12)


def test_y_product_needs_rx_layers():
    circuit = build_ansatz(AnsatzSpec(n_qubits=2, repetitions=1))
    with pytest.raises(QTEException) as exc:
        initial_parameter_binding(circuit, InitialState.PRODUCT, Basis.Y, "01")
    assert exc.value.code == Status.UNSUPPORTED_ANSATZ


def test_product_binding_checks_outcome():
    circuit = build_ansatz(AnsatzSpec(n_qubits=2, repetitions=1))
    with pytest.raises(QTEException) as exc:
        initial_parameter_binding(circuit, InitialState.PRODUCT, Basis.X, "012")
    assert exc.value.code == Status.INVALID_ARGUMENT


def test_shared_parameter_map():
    gates = [Gate(GateKind.RY, (0,), 0), Gate(GateKind.RZ, (0,), 1)]
    circuit = ParameterizedCircuit.from_gates(1, gates, parameter_map=np.array([[1.0], [1.0]]))
    theta = 0.7
    rz = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    assert circuit.d == 1
    assert_allclose(circuit.run(np.array([theta])).amplitudes, rz @ ry_state(theta), atol=1e-12)


def test_derivative_states_match_finite_differences(rng):
    circuit = build_ansatz(AnsatzSpec(n_qubits=2, repetitions=1))
    theta = rng.uniform(-math.pi, math.pi, circuit.d)
    _, derivatives = circuit.derivative_states(theta)
    h = 1e-6
    for k in range(circuit.d):
        shift = np.zeros(circuit.d)
        shift[k] = h
        fd = (circuit.run(theta + shift).amplitudes - circuit.run(theta - shift).amplitudes) / (2 * h)
        assert_allclose(derivatives[k], fd, atol=1e-8)
