import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

import app.lib.evolution.dualqte as dualqte_module
from app.constants import AnsatzFamily, Basis, Entangler, EvolutionMode, GateKind, InitialState, MethodTag, Topology
from app.constants.status import Status
from app.lib.analysis import ResourceLedger, circuit_counts, exact_reference, integrated_bures, warm_start_study
from app.lib.estimators import GradientMethod, ShotConfig, energy_gradient_b_imag, qgt_exact
from app.lib.evolution import (
    DualConfig,
    EvolutionConfig,
    RegularizationPolicy,
    StepSolution,
    check_delta_tau_feasibility,
    dual_loss,
    dual_loss_gradient,
    dualqte_evolve,
    solve_step,
    varqte_evolve,
)
from app.lib.exception import QTEException
from app.lib.hamiltonian import (
    HeisenbergSpec,
    PauliSum,
    expectation,
    heisenberg,
    magnetization,
    single_qubit_sum,
)
from app.lib.sim import AnsatzSpec, Gate, ParameterizedCircuit, build_ansatz, initial_parameter_binding


def ry_product(n):
    return ParameterizedCircuit.from_gates(n, [Gate(GateKind.RY, (q,), q) for q in range(n)])


def test_loss_vanishes_at_zero(small_circuit, rng):
    theta = rng.uniform(-math.pi, math.pi, small_circuit.d)
    b = rng.normal(size=small_circuit.d)
    assert dual_loss(np.zeros(small_circuit.d), theta, b, 0.01, small_circuit) == pytest.approx(0.0, abs=1e-14)


def test_loss_hessian_at_zero_is_qgt(rng):
    circuit = build_ansatz(AnsatzSpec(n_qubits=2, repetitions=1))
    theta = rng.uniform(-math.pi, math.pi, circuit.d)
    b = rng.normal(size=circuit.d)
    d, h = circuit.d, 1e-4

    def loss(x):
        return dual_loss(x, theta, b, 0.05, circuit)

    hessian = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            ei, ej = np.eye(d)[i] * h, np.eye(d)[j] * h
            hessian[i, j] = (loss(ei + ej) - loss(ei - ej) - loss(ej - ei) + loss(-ei - ej)) / (4 * h * h)
    assert_allclose(hessian, qgt_exact(circuit, theta).g, atol=1e-5)
    assert np.linalg.eigvalsh(0.5 * (hessian + hessian.T))[0] >= -1e-5


@pytest.mark.parametrize("method", [GradientMethod.psr(), GradientMethod.lcu()])
def test_loss_gradient_matches_finite_differences(small_circuit, rng, method):
    theta = rng.uniform(-math.pi, math.pi, small_circuit.d)
    b = rng.normal(size=small_circuit.d)
    delta = rng.normal(scale=0.2, size=small_circuit.d)
    grad = dual_loss_gradient(delta, theta, b, 0.02, small_circuit, method=method)
    h = 1e-5
    expected = np.zeros(small_circuit.d)
    for k in range(small_circuit.d):
        e = np.eye(small_circuit.d)[k] * h
        expected[k] = (dual_loss(delta + e, theta, b, 0.02, small_circuit)
                       - dual_loss(delta - e, theta, b, 0.02, small_circuit)) / (2 * h)
    assert_allclose(grad, expected, atol=1e-7)


def test_loss_length_mismatch(small_circuit):
    with pytest.raises(QTEException) as exc:
        dual_loss(np.zeros(3), np.zeros(small_circuit.d), np.zeros(small_circuit.d), 0.01, small_circuit)
    assert exc.value.code == Status.DIMENSION_MISMATCH


def test_step_minimizer_approaches_varqte_update():
    circuit, H = ry_product(2), single_qubit_sum(2, Basis.Z)
    theta = np.full(2, math.pi / 3)
    b = energy_gradient_b_imag(circuit, theta, H, GradientMethod.psr())
    config = DualConfig(dt=0.01, T=0.01, delta_tau=1e-3, eta=1.0, K0=500, K_warm=10)
    solution = solve_step(circuit, theta, b, config)
    theta_dot = np.linalg.solve(qgt_exact(circuit, theta).g, b.values)
    assert_allclose(solution.delta_theta / config.delta_tau, theta_dot, rtol=1e-2)
    assert solution.iterations == 500
    assert solution.measurements_used == 0


def test_exact_loss_trace_decreases():
    circuit, H = ry_product(2), single_qubit_sum(2, Basis.Z)
    theta = np.full(2, 0.7)
    b = energy_gradient_b_imag(circuit, theta, H, GradientMethod.psr())
    solution = solve_step(circuit, theta, b, DualConfig(dt=0.01, T=0.01, eta=0.5, K0=50, K_warm=5))
    assert np.all(np.diff(solution.loss_trace) <= 1e-12)
    assert solution.final_loss <= solution.loss_trace[0]


def test_tolerance_stops_early():
    circuit, H = ry_product(2), single_qubit_sum(2, Basis.Z)
    theta = np.full(2, 0.7)
    b = energy_gradient_b_imag(circuit, theta, H, GradientMethod.psr())
    config = DualConfig(dt=0.01, T=0.01, eta=1.0, K0=10, K_warm=5, tolerance=1e-12, max_iterations=400)
    solution = solve_step(circuit, theta, b, config)
    assert 10 < solution.iterations < 400


def test_tolerance_needs_exact_shots():
    with pytest.raises(ValidationError):
        DualConfig(tolerance=1e-6, shots=ShotConfig(shots=100))


def test_warm_iterations_cannot_exceed_initial():
    with pytest.raises(ValidationError):
        DualConfig(K0=5, K_warm=10)


def test_feasibility_report():
    report = check_delta_tau_feasibility(np.array([1.0, 0.1]), 0.5)
    assert not report["ok"]
    assert report["violations"] == [0]
    assert report["max_feasible"] == pytest.approx(0.25)
    assert check_delta_tau_feasibility(np.array([1.0, 0.1]), 0.2)["ok"]


def test_feasibility_of_zero_gradient():
    report = check_delta_tau_feasibility(np.zeros(3), 10.0)
    assert report["ok"]
    assert math.isinf(report["max_feasible"])


@pytest.mark.parametrize(
    "method,tag",
    [(GradientMethod.psr(), MethodTag.DUALQITE_PSR), (GradientMethod.lcu(), MethodTag.DUALQITE_LCU)],
)
def test_ledger_matches_closed_form(small_circuit, chain3, method, tag):
    config = DualConfig(
        dt=0.01, T=0.03, K0=6, K_warm=2, shots=ShotConfig(shots=20, rng_seed=4), gradient_method=method
    )
    trajectory = dualqte_evolve(small_circuit, chain3, np.full(small_circuit.d, 0.1), config)
    d, P = small_circuit.d, chain3.measured_terms
    assert trajectory.method == tag
    assert [step["iterations"] for step in trajectory.steps] == [6, 2, 2]
    assert [step["circuits"] for step in trajectory.steps] == [circuit_counts(tag, d, P, k) for k in (6, 2, 2)]
    assert ResourceLedger.from_trajectory(trajectory).matches_closed_form(d, P)


def test_cold_start_runs_k0_every_step(small_circuit, chain3):
    config = DualConfig(dt=0.01, T=0.02, K0=4, K_warm=2, warm_start=False)
    trajectory = dualqte_evolve(small_circuit, chain3, np.full(small_circuit.d, 0.1), config)
    assert [step["iterations"] for step in trajectory.steps] == [4, 4]


def test_real_time_dual_uses_lcu(small_circuit, chain3):
    config = DualConfig(mode=EvolutionMode.REAL, dt=0.01, T=0.01, K0=3, K_warm=1)
    trajectory = dualqte_evolve(small_circuit, chain3, np.full(small_circuit.d, 0.1), config)
    assert trajectory.method == MethodTag.DUALQRTE_LCU
    assert trajectory.steps[0]["circuits"] == circuit_counts(MethodTag.DUALQRTE_LCU, small_circuit.d, 9, 3)


def test_dual_trajectory_tracks_varqte():
    circuit, H = ParameterizedCircuit.from_gates(1, [Gate(GateKind.RY, (0,), 0)]), PauliSum.from_list([("Z", 1.0)])
    theta0 = np.array([0.5])
    dual = dualqte_evolve(
        circuit, H, theta0, DualConfig(dt=0.01, T=0.3, delta_tau=1e-3, eta=2.0, K0=200, K_warm=50)
    )
    exact = varqte_evolve(
        circuit, H, theta0, EvolutionConfig(dt=0.01, T=0.3, regularization=RegularizationPolicy.truncated_svd(1e-10))
    )
    assert_allclose(dual.theta_matrix, exact.theta_matrix, atol=1e-2)


def test_warm_start_needs_fewer_iterations():
    circuit, H = ry_product(2), single_qubit_sum(2, Basis.Z)
    config = DualConfig(dt=0.01, T=0.05, delta_tau=1e-2, eta=1.0, K0=100, K_warm=10)
    table = warm_start_study(circuit, H, np.full(2, 0.6), config)
    warm = [row[2] for row in table["rows"]]
    zero = [row[3] for row in table["rows"]]
    assert table["header"] == ["step", "time", "warm_iterations", "zero_iterations"]
    assert sum(warm[1:]) < sum(zero[1:])


def test_abort_carries_partial_trajectory(small_circuit, chain3, monkeypatch):
    calls = {"n": 0}
    original = dualqte_module.solve_step

    def failing_solve_step(circuit, theta, b, config, init=None, sampler=None):
        calls["n"] += 1
        if calls["n"] == 2:
            return StepSolution(delta_theta=np.full(circuit.d, np.nan))
        return original(circuit, theta, b, config, init=init, sampler=sampler)

    monkeypatch.setattr(dualqte_module, "solve_step", failing_solve_step)
    config = DualConfig(dt=0.01, T=0.05, K0=3, K_warm=1)
    with pytest.raises(QTEException) as exc:
        dualqte_evolve(small_circuit, chain3, np.full(small_circuit.d, 0.1), config)
    assert exc.value.code == Status.NUMERICAL_ABORT
    assert len(exc.value.partial.steps) == 1
    assert len(exc.value.partial.thetas) == 2


@pytest.mark.slow
def test_noiseless_imaginary_time_tracking():
    H = heisenberg(HeisenbergSpec(n=6, topology=Topology.CIRCLE))
    circuit = build_ansatz(AnsatzSpec(n_qubits=6, repetitions=3))
    theta0 = initial_parameter_binding(circuit, InitialState.PLUS_ALL)
    config = DualConfig(dt=0.01, T=2.0, delta_tau=0.01, eta=0.1, K0=100, K_warm=10)
    trajectory = dualqte_evolve(circuit, H, theta0, config)
    reference = exact_reference(trajectory, circuit, H)
    assert integrated_bures(trajectory, reference, circuit) <= 0.05
    exact_energy = expectation(H, reference[-1])
    assert expectation(H, circuit.run(trajectory.final_theta)) == pytest.approx(exact_energy, rel=0.02)


@pytest.mark.slow
def test_real_time_magnetization_is_conserved():
    H = heisenberg(HeisenbergSpec(n=4, topology=Topology.CHAIN))
    spec = AnsatzSpec(n_qubits=4, repetitions=3, family=AnsatzFamily.ALTERNATING_XY, entangler=Entangler.CHAIN_RZZ)
    circuit = build_ansatz(spec)
    theta0 = initial_parameter_binding(circuit, InitialState.PLUS_ALL)
    config = DualConfig(mode=EvolutionMode.REAL, dt=0.02, T=2.0, delta_tau=1e-3, K0=100, K_warm=10)
    trajectory = dualqte_evolve(circuit, H, theta0, config)
    reference = exact_reference(trajectory, circuit, H)
    mx, mz = magnetization(4, Basis.X), magnetization(4, Basis.Z)
    for theta, exact in zip(trajectory.thetas, reference):
        psi = circuit.run(theta)
        assert abs(expectation(mz, psi)) <= 0.02
        assert expectation(mx, psi) == pytest.approx(expectation(mx, exact), abs=0.05)


@pytest.mark.slow
def test_warm_start_cuts_iterations_at_scale():
    H = heisenberg(HeisenbergSpec(n=8, topology=Topology.CIRCLE))
    circuit = build_ansatz(AnsatzSpec(n_qubits=8, repetitions=3))
    theta0 = initial_parameter_binding(circuit, InitialState.PLUS_ALL)
    config = DualConfig(dt=0.01, T=0.1, delta_tau=0.01, eta=0.1, tolerance=1e-6, max_iterations=2000)
    table = warm_start_study(circuit, H, theta0, config)
    warm = [row[2] for row in table["rows"][1:]]
    zero = [row[3] for row in table["rows"][1:]]
    assert np.median(warm) < np.median(zero) / 3
