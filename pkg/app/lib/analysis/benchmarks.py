import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.constants import Basis, GateKind
from app.constants.status import Status
from app.lib.analysis.metrics import bures_distance
from app.lib.estimators import (
    GradientMethod,
    ShotConfig,
    ShotSampler,
    energy_gradient_b_imag,
    qgt_exact,
    qgt_psr,
)
from app.lib.evolution import (
    DualConfig,
    RegularizationPolicy,
    Trajectory,
    dual_loss,
    dualqte_evolve,
    solve_step,
    solve_update,
)
from app.lib.exception import QTEException
from app.lib.hamiltonian import PauliSum, single_qubit_sum
from app.lib.sim import Gate, ParameterizedCircuit
from app.types import TableData
from app.utils.logger import logger


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise QTEException(Status.INVALID_ARGUMENT, "need at least two matching points for a log-log fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise QTEException(Status.INVALID_ARGUMENT, "log-log fit needs positive data")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def grad_norm_trace(trajectory: Trajectory) -> Dict[str, list]:
    """Per-step evolution-gradient norms and per-iteration dual-loss gradient norms."""
    return {
        "times": [step["time"] for step in trajectory.steps],
        "b_norm": [step["b_norm"] for step in trajectory.steps],
        "loss_gradient_norm": [step.get("gradient_norm_trace", []) for step in trajectory.steps],
    }


def illustrative_circuit() -> ParameterizedCircuit:
    """RZ(theta) RY(theta)|0>: one parameter driving two rotation slots."""
    gates = [Gate(GateKind.RY, (0,), 0), Gate(GateKind.RZ, (0,), 1)]
    return ParameterizedCircuit.from_gates(1, gates, parameter_map=np.array([[1.0], [1.0]]))


def illustrative_loss_curve(
    theta: float = math.pi / 4,
    delta_tau: float = 0.5,
    points: int = 201,
    circuit: Optional[ParameterizedCircuit] = None,
    H: Optional[PauliSum] = None,
) -> TableData:
    """Dual loss next to its QGT quadratic model over delta_theta in [-pi, pi]."""
    circuit = illustrative_circuit() if circuit is None else circuit
    H = PauliSum.from_list([("Z", 1.0)]) if H is None else H
    theta_vec = np.full(circuit.d, theta)
    b = energy_gradient_b_imag(circuit, theta_vec, H, GradientMethod.psr()).values
    g = qgt_exact(circuit, theta_vec).g
    rows = []
    for value in np.linspace(-math.pi, math.pi, points):
        delta = np.full(circuit.d, value)
        quadratic = 0.5 * float(delta @ g @ delta) - delta_tau * float(delta @ b)
        rows.append([float(value), dual_loss(delta, theta_vec, b, delta_tau, circuit), quadratic])
    return TableData(header=["delta_theta", "dual_loss", "qgt_loss"], rows=rows)


def delta_tau_scaling(
    delta_taus: Sequence[float],
    circuit: Optional[ParameterizedCircuit] = None,
    H: Optional[PauliSum] = None,
    theta: Optional[np.ndarray] = None,
    shots: Optional[int] = None,
    dt: float = 0.01,
    eta: float = 0.5,
    iterations: int = 200,
    seed: int = 0,
) -> TableData:
    """Distance between one dual update and the exact VarQTE update for each delta_tau."""
    circuit = illustrative_circuit() if circuit is None else circuit
    H = PauliSum.from_list([("Z", 1.0)]) if H is None else H
    theta = np.full(circuit.d, math.pi / 4) if theta is None else np.asarray(theta, dtype=float)
    g = qgt_exact(circuit, theta).g
    b_exact = energy_gradient_b_imag(circuit, theta, H, GradientMethod.psr()).values
    theta_dot = solve_update(g, b_exact, RegularizationPolicy.truncated_svd(1e-10))

    rows = []
    for index, delta_tau in enumerate(delta_taus):
        config = DualConfig(
            dt=dt,
            T=dt,
            delta_tau=delta_tau,
            eta=eta,
            K0=iterations,
            K_warm=1,
            shots=ShotConfig(shots=shots, rng_seed=seed, stream_id=index),
        )
        sampler = ShotSampler(config.shots)
        b = energy_gradient_b_imag(circuit, theta, H, config.gradient_method, sampler)
        solution = solve_step(circuit, theta, b, config, sampler=sampler)
        error = dt * float(np.linalg.norm(solution.delta_theta / delta_tau - theta_dot))
        rows.append([float(delta_tau), error, solution.measurements_used])
    return TableData(header=["delta_tau", "update_error", "measurements"], rows=rows)


def product_state_diagnostic(
    n_values: Sequence[int] = tuple(range(2, 11)),
    shots: int = 1000,
    delta_c: float = 1e-2,
    repetitions: int = 10,
    dt: float = 0.01,
    seed: int = 0,
) -> Tuple[TableData, Dict[str, float]]:
    """Sampling error of one VarQITE step on sum_i Z_i from a single RY layer at pi/2.

    Returns mean errors of theta_dot, g and b per size, the one-step Bures error eps_S,
    the sampled theta_dot norm and the log-log exponents of each column against d.
    """
    policy = RegularizationPolicy.diagonal_shift(delta_c)
    method = GradientMethod.psr()
    rows = []
    for n in n_values:
        circuit = ParameterizedCircuit.from_gates(n, [Gate(GateKind.RY, (q,), q) for q in range(n)])
        H = single_qubit_sum(n, Basis.Z)
        theta = np.full(n, math.pi / 2)
        g = qgt_exact(circuit, theta).g
        b = energy_gradient_b_imag(circuit, theta, H, method).values
        theta_dot = solve_update(g, b, policy)
        exact_state = circuit.run(theta + dt * theta_dot)

        errors = np.zeros((repetitions, 5))
        for rep in range(repetitions):
            sampler = ShotSampler(ShotConfig(shots=shots, rng_seed=seed, stream_id=n * repetitions + rep))
            g_s = qgt_psr(circuit, theta, sampler).g
            b_s = energy_gradient_b_imag(circuit, theta, H, method, sampler).values
            theta_dot_s = solve_update(g_s, b_s, policy)
            errors[rep] = [
                np.linalg.norm(theta_dot_s - theta_dot),
                np.linalg.norm(g_s - g),
                np.linalg.norm(b_s - b),
                bures_distance(exact_state, circuit.run(theta + dt * theta_dot_s)),
                np.linalg.norm(theta_dot_s),
            ]
        mean = errors.mean(axis=0)
        rows.append([n, circuit.d, *[float(x) for x in mean]])
        logger.debug(f"product-state diagnostic n={n}: |d theta_dot|={mean[0]:.4e} eps_S={mean[3]:.4e}")

    header = ["n", "d", "theta_dot_error", "qgt_error", "b_error", "eps_s", "theta_dot_norm"]
    table = TableData(header=header, rows=rows)
    ds = [row[1] for row in rows]
    exponents = {}
    if len(rows) >= 2:
        for column, name in enumerate(header[2:], start=2):
            values = [row[column] for row in rows]
            if all(v > 0 for v in values):
                exponents[name] = loglog_slope(ds, values)
        columns = np.array(rows, dtype=float)
        exponents["eps_s_correlation"] = float(np.corrcoef(columns[:, 5], columns[:, 2])[0, 1])
    return table, exponents


def warm_start_study(
    circuit: ParameterizedCircuit, H: PauliSum, theta0: np.ndarray, config: DualConfig
) -> TableData:
    """Iterations per timestep under the loss-change stopping rule, warm vs zero initialization."""
    if config.tolerance is None:
        config = config.model_copy(update={"tolerance": 1e-4 * config.dt})
    warm = dualqte_evolve(circuit, H, theta0, config.model_copy(update={"warm_start": True}))
    cold = dualqte_evolve(circuit, H, theta0, config.model_copy(update={"warm_start": False}))
    rows = [
        [w["step"], w["time"], w["iterations"], c["iterations"]] for w, c in zip(warm.steps, cold.steps)
    ]
    return TableData(header=["step", "time", "warm_iterations", "zero_iterations"], rows=rows)


def gradient_norm_scaling(
    circuits: Sequence[Tuple[ParameterizedCircuit, PauliSum, np.ndarray]],
    config: DualConfig,
) -> TableData:
    """Mean evolution-gradient norm and first-iteration loss-gradient norm per system size."""
    rows: List[list] = []
    for circuit, H, theta0 in circuits:
        trajectory = dualqte_evolve(circuit, H, theta0, config)
        trace = grad_norm_trace(trajectory)
        first = [norms[0] for norms in trace["loss_gradient_norm"] if norms]
        rows.append([H.n_qubits, circuit.d, float(np.mean(trace["b_norm"])), float(np.mean(first))])
    return TableData(header=["n", "d", "mean_b_norm", "mean_initial_loss_gradient_norm"], rows=rows)
