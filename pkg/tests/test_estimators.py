import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from pydantic import ValidationError

from app.constants import EvolutionMode
from app.constants.status import Status
from app.lib.analysis import illustrative_circuit
from app.lib.estimators import (
    GradientMethod,
    ShotConfig,
    ShotSampler,
    energy,
    energy_gradient_b_imag,
    evolution_gradient,
    expectation_estimate,
    fidelity,
    fidelity_gradient_lcu,
    fidelity_gradient_psr,
    qgt_exact,
    qgt_lcu,
    qgt_psr,
    sample_binomial_estimate,
)
from app.lib.exception import QTEException
from app.lib.hamiltonian import PauliSum, expectation
from app.lib.sim import AnsatzSpec, build_ansatz


def finite_difference(f, theta, h=1e-5):
    grad = np.zeros_like(theta)
    for k in range(theta.shape[0]):
        shift = np.zeros_like(theta)
        shift[k] = h
        grad[k] = (f(theta + shift) - f(theta - shift)) / (2 * h)
    return grad


def test_qgt_psr_matches_exact(small_circuit, rng):
    theta = rng.uniform(-math.pi, math.pi, small_circuit.d)
    assert_allclose(qgt_psr(small_circuit, theta).g, qgt_exact(small_circuit, theta).g, atol=1e-10)


def test_qgt_lcu_matches_exact(small_circuit, rng):
    theta = rng.uniform(-math.pi, math.pi, small_circuit.d)
    assert_allclose(qgt_lcu(small_circuit, theta).g, qgt_exact(small_circuit, theta).g, atol=1e-12)


def test_qgt_psr_with_shared_parameters():
    circuit = illustrative_circuit()
    theta = np.array([0.9])
    assert_allclose(qgt_psr(circuit, theta).g, qgt_exact(circuit, theta).g, atol=1e-10)


def test_qgt_is_infidelity_hessian(rng):
    circuit = build_ansatz(AnsatzSpec(n_qubits=2, repetitions=1))
    theta = rng.uniform(-math.pi, math.pi, circuit.d)
    g = qgt_exact(circuit, theta).g
    h = 1e-4
    for i, j in [(0, 0), (1, 3), (2, 5)]:
        ei, ej = np.eye(circuit.d)[i] * h, np.eye(circuit.d)[j] * h

        def infidelity(delta):
            return 1.0 - fidelity(circuit, theta, theta + delta)

        second = (infidelity(ei + ej) - infidelity(ei - ej) - infidelity(ej - ei) + infidelity(-ei - ej)) / (4 * h * h)
        assert second / 2 == pytest.approx(g[i, j], abs=1e-5)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_qgt_is_psd_and_bounded(seed):
    circuit = build_ansatz(AnsatzSpec(n_qubits=3, repetitions=1))
    theta = np.random.default_rng(seed).uniform(-math.pi, math.pi, circuit.d)
    eigenvalues = np.linalg.eigvalsh(qgt_exact(circuit, theta).g)
    assert eigenvalues[0] >= -1e-10
    assert eigenvalues[-1] <= circuit.d / 4 + 1e-10


@pytest.mark.parametrize("method", [GradientMethod.psr(), GradientMethod.lcu()])
def test_imaginary_gradient_is_half_negative_energy_gradient(small_circuit, chain3, rng, method):
    theta = rng.uniform(-math.pi, math.pi, small_circuit.d)
    b = energy_gradient_b_imag(small_circuit, theta, chain3, method)
    expected = -0.5 * finite_difference(lambda t: energy(small_circuit, t, chain3), theta)
    assert_allclose(b.values, expected, atol=1e-7)


def test_imaginary_gradient_with_shared_parameters():
    circuit = illustrative_circuit()
    H = PauliSum.from_list([("Z", 1.0)])
    theta = np.array([0.4])
    b = energy_gradient_b_imag(circuit, theta, H, GradientMethod.psr())
    expected = -0.5 * finite_difference(lambda t: energy(circuit, t, H), theta)
    assert_allclose(b.values, expected, atol=1e-8)


def test_real_gradient_needs_lcu(small_circuit, chain3):
    theta = np.zeros(small_circuit.d)
    with pytest.raises(QTEException) as exc:
        evolution_gradient(small_circuit, theta, chain3, EvolutionMode.REAL, GradientMethod.psr())
    assert exc.value.code == Status.INCOMPATIBLE_METHOD


def test_real_gradient_formula(small_circuit, chain3, rng):
    theta = rng.uniform(-math.pi, math.pi, small_circuit.d)
    b = evolution_gradient(small_circuit, theta, chain3, EvolutionMode.REAL, GradientMethod.lcu()).values
    psi, derivatives = small_circuit.derivative_states(theta)
    h_psi = chain3.to_dense() @ psi.amplitudes
    e = expectation(chain3, psi)
    for k in range(small_circuit.d):
        expected = np.imag(np.vdot(derivatives[k], h_psi) - np.vdot(derivatives[k], psi.amplitudes) * e)
        assert b[k] == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("estimator", [fidelity_gradient_psr, fidelity_gradient_lcu])
def test_fidelity_gradient(small_circuit, rng, estimator):
    theta = rng.uniform(-math.pi, math.pi, small_circuit.d)
    delta = rng.normal(scale=0.3, size=small_circuit.d)
    grad = estimator(small_circuit, theta, delta)
    expected = finite_difference(lambda x: fidelity(small_circuit, theta, theta + x), delta)
    assert_allclose(grad, expected, atol=1e-7)


def test_fidelity_gradient_with_shared_parameters():
    circuit = illustrative_circuit()
    theta, delta = np.array([0.3]), np.array([0.8])
    expected = finite_difference(lambda x: fidelity(circuit, theta, theta + x), delta)
    assert_allclose(fidelity_gradient_psr(circuit, theta, delta), expected, atol=1e-8)
    assert_allclose(fidelity_gradient_lcu(circuit, theta, delta), expected, atol=1e-8)


def test_circuit_tallies(small_circuit, chain3):
    theta = np.zeros(small_circuit.d)
    d, P = small_circuit.d, chain3.measured_terms

    sampler = ShotSampler(ShotConfig())
    qgt_psr(small_circuit, theta, sampler)
    assert sampler.circuits == 2 * d * (d + 1)

    sampler = ShotSampler(ShotConfig())
    qgt_lcu(small_circuit, theta, sampler)
    assert sampler.circuits == d * (d + 1) // 2 + 2 * d

    sampler = ShotSampler(ShotConfig())
    energy_gradient_b_imag(small_circuit, theta, chain3, GradientMethod.psr(), sampler)
    assert sampler.circuits == 2 * P * d

    sampler = ShotSampler(ShotConfig())
    energy_gradient_b_imag(small_circuit, theta, chain3, GradientMethod.lcu(), sampler)
    assert sampler.circuits == P * d

    sampler = ShotSampler(ShotConfig())
    fidelity_gradient_psr(small_circuit, theta, theta, sampler)
    assert sampler.circuits == 2 * d

    sampler = ShotSampler(ShotConfig())
    fidelity_gradient_lcu(small_circuit, theta, theta, sampler)
    assert sampler.circuits == d


def test_measurements_follow_shots():
    sampler = ShotSampler(ShotConfig(shots=100))
    sampler.record(7)
    assert sampler.measurements == 700
    assert ShotSampler(ShotConfig()).measurements == 0


def test_binomial_estimate_statistics():
    sampler = ShotSampler(ShotConfig(shots=10000, rng_seed=5))
    estimates = np.array([sampler.binomial(0.3) for _ in range(200)])
    assert estimates.mean() == pytest.approx(0.3, abs=0.01)
    assert estimates.std() == pytest.approx(math.sqrt(0.3 * 0.7 / 10000), rel=0.3)


def test_exact_estimate_returns_probability():
    assert sample_binomial_estimate(0.25, ShotConfig()) == 0.25


def test_probability_outside_unit_interval():
    with pytest.raises(QTEException) as exc:
        sample_binomial_estimate(1.2, ShotConfig(shots=10))
    assert exc.value.code == Status.INVALID_ARGUMENT


def test_same_seed_same_estimates(small_circuit, chain3, rng):
    theta = rng.uniform(-math.pi, math.pi, small_circuit.d)
    config = ShotConfig(shots=50, rng_seed=11, stream_id=3)
    first = qgt_psr(small_circuit, theta, ShotSampler(config)).g
    second = qgt_psr(small_circuit, theta, ShotSampler(config)).g
    other = qgt_psr(small_circuit, theta, ShotSampler(config.model_copy(update={"stream_id": 4}))).g
    assert_allclose(first, second)
    assert not np.allclose(first, other)


def test_sampled_qgt_stays_symmetric(small_circuit, rng):
    theta = rng.uniform(-math.pi, math.pi, small_circuit.d)
    g = qgt_psr(small_circuit, theta, ShotConfig(shots=20, rng_seed=1)).g
    assert_allclose(g, g.T)


def test_expectation_estimate_exact(chain3, small_circuit, rng):
    psi = small_circuit.run(rng.uniform(-math.pi, math.pi, small_circuit.d))
    assert expectation_estimate(psi, chain3) == pytest.approx(expectation(chain3, psi), abs=1e-12)


def test_shot_config_rejects_zero_shots():
    with pytest.raises(ValidationError):
        ShotConfig(shots=0)


def test_gradient_method_cost_tag_must_match():
    with pytest.raises(ValidationError):
        GradientMethod(cost_model_tag="LCU")


@pytest.mark.parametrize("n", [2, 3, 4])
def test_qgt_psr_agrees_with_exact_across_sizes(n):
    circuit = build_ansatz(AnsatzSpec(n_qubits=n, repetitions=1))
    rng = np.random.default_rng(n)
    for _ in range(5):
        theta = rng.uniform(-math.pi, math.pi, circuit.d)
        g = qgt_exact(circuit, theta).g
        assert np.abs(qgt_psr(circuit, theta).g - g).max() <= 1e-8
        assert np.linalg.eigvalsh(g)[-1] <= circuit.d / 4 + 1e-10


def test_infidelity_is_quadratic_in_the_metric():
    circuit = build_ansatz(AnsatzSpec(n_qubits=2, repetitions=1))
    rng = np.random.default_rng(8)
    theta = rng.uniform(-math.pi, math.pi, circuit.d)
    direction = rng.normal(size=circuit.d)
    direction /= np.linalg.norm(direction)
    g = qgt_exact(circuit, theta).g
    hs = [0.2, 0.1, 0.05]
    residuals = []
    for h in hs:
        delta = h * direction
        residuals.append(abs((1.0 - fidelity(circuit, theta, theta + delta)) - delta @ g @ delta))
    slope = np.polyfit(np.log(hs), np.log(residuals), 1)[0]
    assert slope >= 2.7
