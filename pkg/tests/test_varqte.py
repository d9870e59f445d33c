import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from pydantic import ValidationError

from app.constants import EvolutionMode, GateKind, MethodTag, RegularizationKind
from app.constants.status import Status
from app.lib.analysis import ResourceLedger, bures_series, circuit_counts, exact_reference
from app.lib.estimators import GradientMethod, ShotConfig
from app.lib.evolution import (
    EvolutionConfig,
    RegularizationPolicy,
    VarQTE,
    l_curve_select,
    menger_curvature,
    solve_update,
    solve_update_with_info,
    varqte_evolve,
)
from app.lib.exception import QTEException
from app.lib.hamiltonian import PauliSum
from app.lib.sim import Gate, ParameterizedCircuit

EXACT_SOLVE = RegularizationPolicy.truncated_svd(1e-10)


def random_psd(rng, d, rank=None):
    A = rng.normal(size=(d, rank or d))
    return A @ A.T / d


def test_diagonal_shift_solve(rng):
    g = random_psd(rng, 5)
    b = rng.normal(size=5)
    expected = np.linalg.solve(g + 0.1 * np.eye(5), b)
    assert_allclose(solve_update(g, b, RegularizationPolicy.diagonal_shift(0.1)), expected, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1), delta_c=st.floats(min_value=1e-3, max_value=1.0))
def test_diagonal_shift_norm_bound(seed, delta_c):
    rng = np.random.default_rng(seed)
    g = random_psd(rng, 4, rank=2)
    b = rng.normal(size=4)
    theta_dot = solve_update(g, b, RegularizationPolicy.diagonal_shift(delta_c))
    assert np.linalg.norm(theta_dot) <= np.linalg.norm(b) / delta_c * (1 + 1e-9)


def test_truncated_svd_matches_pseudo_inverse(rng):
    g = random_psd(rng, 5, rank=3)
    b = rng.normal(size=5)
    expected = np.linalg.pinv(g, rcond=1e-8) @ b
    assert_allclose(solve_update(g, b, RegularizationPolicy.truncated_svd(1e-8)), expected, atol=1e-8)


def test_unregularized_singular_system():
    g = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(QTEException) as exc:
        solve_update(g, np.array([1.0, 1.0]), RegularizationPolicy.diagonal_shift(0.0))
    assert exc.value.code == Status.SINGULAR_SYSTEM


def test_zero_gradient_gives_zero_update(rng):
    theta_dot, strength = solve_update_with_info(random_psd(rng, 3), np.zeros(3), RegularizationPolicy())
    assert_allclose(theta_dot, np.zeros(3))
    assert strength == 0.0


def test_solve_dimension_mismatch(rng):
    with pytest.raises(QTEException) as exc:
        solve_update(random_psd(rng, 3), np.ones(4))
    assert exc.value.code == Status.DIMENSION_MISMATCH


def test_l_curve_solution_solves_shifted_system(rng):
    g = random_psd(rng, 6, rank=3)
    b = rng.normal(size=6)
    policy = RegularizationPolicy()
    x, lam = l_curve_select(g, b, policy.grid)
    assert lam in policy.grid
    assert_allclose((g + lam * np.eye(6)) @ x, b, atol=1e-8)


def test_l_curve_grid_validation():
    with pytest.raises(ValidationError):
        RegularizationPolicy(kind=RegularizationKind.L_CURVE, grid=[1e-3, 1e-2, 1e-1])
    with pytest.raises(ValidationError):
        RegularizationPolicy(kind=RegularizationKind.L_CURVE, grid=list(np.logspace(-3, -1, 10)))


def test_menger_curvature_of_circle():
    angles = np.linspace(0.0, math.pi / 2, 7)
    curvature = menger_curvature(2.0 * np.cos(angles), 2.0 * np.sin(angles))
    assert np.isnan(curvature[0]) and np.isnan(curvature[-1])
    assert_allclose(np.abs(curvature[1:-1]), 0.5, rtol=1e-10)


def ry_circuit():
    return ParameterizedCircuit.from_gates(1, [Gate(GateKind.RY, (0,), 0)])


def test_varqite_follows_exact_single_qubit_solution():
    # RY(theta)|0> under e^{-tZ}: tan(theta/2) grows as e^{2t}.
    circuit, H = ry_circuit(), PauliSum.from_list([("Z", 1.0)])
    theta0 = np.array([0.5])
    config = EvolutionConfig(dt=0.001, T=0.5, regularization=EXACT_SOLVE)
    trajectory = varqte_evolve(circuit, H, theta0, config)
    expected = 2 * math.atan(math.tan(0.25) * math.exp(1.0))
    assert trajectory.final_theta[0] == pytest.approx(expected, abs=5e-3)
    assert trajectory.method == MethodTag.VARQITE_PSR
    assert len(trajectory.times) == 501


def test_varqrte_phase_rotation():
    # e^{-itZ} on RZ RY(pi/2)|0> only advances the RZ angle at rate 2.
    gates = [Gate(GateKind.RY, (0,), 0), Gate(GateKind.RZ, (0,), 1)]
    circuit, H = ParameterizedCircuit.from_gates(1, gates), PauliSum.from_list([("Z", 1.0)])
    config = EvolutionConfig(mode=EvolutionMode.REAL, dt=0.01, T=0.2, regularization=EXACT_SOLVE)
    trajectory = varqte_evolve(circuit, H, np.array([math.pi / 2, 0.0]), config)
    assert_allclose(trajectory.final_theta, [math.pi / 2, 0.4], atol=1e-9)
    distances = bures_series(trajectory, exact_reference(trajectory, circuit, H), circuit)
    assert distances.max() < 1e-8
    assert trajectory.method == MethodTag.VARQRTE_LCU


def test_real_time_rejects_parameter_shift(small_circuit, chain3):
    config = EvolutionConfig(mode=EvolutionMode.REAL, gradient_method=GradientMethod.psr())
    with pytest.raises(QTEException) as exc:
        VarQTE(small_circuit, chain3, config)
    assert exc.value.code == Status.INCOMPATIBLE_METHOD


def test_default_gradient_method_per_mode():
    assert EvolutionConfig().gradient_method == GradientMethod.psr()
    assert EvolutionConfig(mode=EvolutionMode.REAL).gradient_method == GradientMethod.lcu()


def test_time_grid_validation():
    with pytest.raises(ValidationError):
        EvolutionConfig(dt=0.5, T=0.2)
    with pytest.raises(ValidationError):
        EvolutionConfig(dt=0.03, T=0.1)
    assert EvolutionConfig(dt=0.02, T=2.0).T == 2.0
    assert EvolutionConfig(dt=0.01, T=0.0).T == 0.0


@pytest.mark.parametrize(
    "method,tag",
    [(GradientMethod.psr(), MethodTag.VARQITE_PSR), (GradientMethod.lcu(), MethodTag.VARQITE_LCU)],
)
def test_ledger_matches_closed_form(small_circuit, chain3, method, tag):
    config = EvolutionConfig(dt=0.01, T=0.03, shots=ShotConfig(shots=20, rng_seed=3), gradient_method=method)
    theta0 = np.full(small_circuit.d, 0.1)
    trajectory = varqte_evolve(small_circuit, chain3, theta0, config)
    d, P = small_circuit.d, chain3.measured_terms
    assert trajectory.method == tag
    assert [step["circuits"] for step in trajectory.steps] == [circuit_counts(tag, d, P)] * 3
    assert trajectory.total_measurements == 3 * 20 * circuit_counts(tag, d, P)
    assert ResourceLedger.from_trajectory(trajectory).matches_closed_form(d, P)


def test_shot_runs_are_reproducible(small_circuit, chain3):
    config = EvolutionConfig(dt=0.01, T=0.02, shots=ShotConfig(shots=30, rng_seed=9))
    theta0 = np.full(small_circuit.d, 0.2)
    first = varqte_evolve(small_circuit, chain3, theta0, config)
    second = varqte_evolve(small_circuit, chain3, theta0, config)
    assert_allclose(first.theta_matrix, second.theta_matrix)


def test_parameter_length_is_checked(small_circuit, chain3):
    with pytest.raises(QTEException) as exc:
        varqte_evolve(small_circuit, chain3, np.zeros(3), EvolutionConfig())
    assert exc.value.code == Status.DIMENSION_MISMATCH


def test_zero_duration_run(small_circuit, chain3):
    trajectory = varqte_evolve(small_circuit, chain3, np.zeros(small_circuit.d), EvolutionConfig(dt=0.01, T=0.0))
    assert trajectory.times == [0.0]
    assert trajectory.steps == []
