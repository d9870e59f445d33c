import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from app.constants import (
    DENSE_MAX_QUBITS,
    Basis,
    EvolutionMode,
    EvolverKind,
    ExperimentKind,
    InitialState,
    MethodTag,
)
from app.experiments.schema import ExperimentConfig
from app.lib.analysis import (
    ResourceLedger,
    bures_distance,
    delta_tau_scaling,
    evaluated_parameters,
    exact_reference,
    grad_norm_trace,
    illustrative_circuit,
    illustrative_loss_curve,
    integrated_bures,
    loglog_slope,
    product_state_diagnostic,
    runtime_estimate,
    runtime_table,
    shot_time_ns,
    trajectory_error_bounds,
)
from app.lib.estimators import GradientMethod, ShotConfig
from app.lib.evolution import DualQTE, TimeEvolver, Trajectory, VarQTE
from app.lib.hamiltonian import ExactPropagator, HeisenbergSpec, PauliSum, expectation, heisenberg, magnetization
from app.lib.metts import MettsConfig, energy_per_site, qmetts_chain
from app.lib.sim import AnsatzSpec, ParameterizedCircuit, build_ansatz, initial_parameter_binding
from app.types import TableData
from app.utils.logger import logger
from app.utils.seeds import stream_seed


@dataclass
class ReplicaResult:
    replica: int
    seed: int
    summary: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, TableData] = field(default_factory=dict)


def _shots(config: ExperimentConfig, replica: int, stream: str, shots: Optional[int]) -> ShotConfig:
    if config.exact_shots:
        shots = None
    return ShotConfig(shots=shots, rng_seed=stream_seed(config.seed, replica, stream))


def _evolver(
    config: ExperimentConfig,
    circuit: ParameterizedCircuit,
    H: PauliSum,
    shots: ShotConfig,
    **overrides,
) -> TimeEvolver:
    if config.method == EvolverKind.VARQTE:
        return VarQTE(circuit, H, config.evolution_config(shots, **overrides))
    return DualQTE(circuit, H, config.dual_config(shots, **overrides))


def _initial_theta(config: ExperimentConfig, circuit: ParameterizedCircuit) -> np.ndarray:
    if config.initial_state == InitialState.PLUS_ALL:
        return initial_parameter_binding(circuit, InitialState.PLUS_ALL)
    outcome = config.initial_outcome or "0" * circuit.n_qubits
    return initial_parameter_binding(circuit, InitialState.PRODUCT, config.initial_basis, outcome)


def trajectory_tables(
    trajectory: Trajectory,
    circuit: ParameterizedCircuit,
    H: PauliSum,
    reference: Optional[List] = None,
) -> Tuple[TableData, TableData]:
    """Per-time parameters, energy and distance to the exact state, and per-step resources."""
    d = trajectory.thetas[0].shape[0]
    header = ["time", *[f"theta_{k}" for k in range(d)], "energy", "fidelity_to_exact", "bures_to_exact"]
    rows = []
    for index, (time, theta) in enumerate(zip(trajectory.times, trajectory.thetas)):
        psi = circuit.run(theta)
        if reference is None:
            fidelity, bures = math.nan, math.nan
        else:
            fidelity = abs(np.vdot(reference[index].amplitudes, psi.amplitudes)) ** 2
            bures = bures_distance(psi, reference[index])
        rows.append([time, *theta.tolist(), expectation(H, psi), fidelity, bures])

    ledger = ResourceLedger.from_trajectory(trajectory)
    resources = [
        [step["step"], circuits, step["shots"] or 0, int(total)]
        for step, circuits, total in zip(trajectory.steps, ledger.circuits, ledger.cumulative_N)
    ]
    return (
        TableData(header=header, rows=rows),
        TableData(header=["step", "circuits", "shots", "cumulative_N"], rows=resources),
    )


def _trajectory_summary(
    trajectory: Trajectory,
    circuit: ParameterizedCircuit,
    H: PauliSum,
    reference: Optional[List],
    repetitions: int,
) -> Dict[str, Any]:
    ledger = ResourceLedger.from_trajectory(trajectory)
    summary: Dict[str, Any] = {
        "method": trajectory.method.value,
        "d": circuit.d,
        "P": H.measured_terms,
        "steps": len(trajectory.steps),
        "final_energy": expectation(H, circuit.run(trajectory.final_theta)),
        "measured_N": ledger.total_N,
        "total_circuits": ledger.total_circuits,
        "ledger_matches_closed_form": ledger.matches_closed_form(
            evaluated_parameters(trajectory.method, circuit), H.measured_terms
        ),
        "runtime_estimate_s": runtime_estimate(circuit.n_qubits, repetitions, ledger.total_N),
    }
    if reference is not None:
        summary["I_B"] = integrated_bures(trajectory, reference, circuit)
        summary["exact_final_energy"] = expectation(H, reference[-1])
    return summary


def _reference(trajectory: Trajectory, circuit: ParameterizedCircuit, H: PauliSum) -> Optional[List]:
    if circuit.n_qubits > DENSE_MAX_QUBITS:
        logger.warning(f"no exact reference above {DENSE_MAX_QUBITS} qubits")
        return None
    return exact_reference(trajectory, circuit, H)


def _gradient_norm_table(trajectory: Trajectory) -> TableData:
    trace = grad_norm_trace(trajectory)
    rows = []
    columns = zip(trajectory.steps, trace["times"], trace["b_norm"], trace["loss_gradient_norm"])
    for step, time, b_norm, norms in columns:
        first = norms[0] if norms else math.nan
        last = norms[-1] if norms else math.nan
        rows.append([step["step"], time, b_norm, step["iterations"], first, last])
    return TableData(
        header=["step", "time", "b_norm", "iterations", "initial_loss_gradient_norm", "final_loss_gradient_norm"],
        rows=rows,
    )


def run_evolution(config: ExperimentConfig, replica: int) -> ReplicaResult:
    """Imaginary- or real-time run of the configured Heisenberg system."""
    result = ReplicaResult(replica, config.seed)
    H = heisenberg(config.system)
    circuit = build_ansatz(config.ansatz)
    theta0 = _initial_theta(config, circuit)
    evolver = _evolver(config, circuit, H, _shots(config, replica, "evolution", config.shots))
    trajectory = evolver.evolve(theta0)
    reference = _reference(trajectory, circuit, H)

    result.tables["trajectory"], result.tables["resources"] = trajectory_tables(trajectory, circuit, H, reference)
    result.summary = _trajectory_summary(trajectory, circuit, H, reference, config.ansatz.repetitions)
    if config.method == EvolverKind.DUAL:
        result.tables["gradient_norms"] = _gradient_norm_table(trajectory)

    if config.mode == EvolutionMode.REAL and reference is not None:
        result.tables["magnetization"] = _magnetization_table(trajectory, circuit, reference)
        result.tables["error_bounds"], bound_summary = _error_bound_table(config, trajectory, circuit, H)
        result.summary.update(bound_summary)
    return result


def _magnetization_table(trajectory: Trajectory, circuit: ParameterizedCircuit, reference: List) -> TableData:
    n = circuit.n_qubits
    observables = {axis: magnetization(n, axis) for axis in (Basis.X, Basis.Z)}
    rows = []
    for time, theta, exact in zip(trajectory.times, trajectory.thetas, reference):
        psi = circuit.run(theta)
        rows.append([
            time,
            expectation(observables[Basis.X], psi),
            expectation(observables[Basis.X], exact),
            expectation(observables[Basis.Z], psi),
            expectation(observables[Basis.Z], exact),
        ])
    return TableData(header=["time", "X", "X_exact", "Z", "Z_exact"], rows=rows)


def _error_bound_table(
    config: ExperimentConfig, trajectory: Trajectory, circuit: ParameterizedCircuit, H: PauliSum
) -> Tuple[TableData, Dict[str, Any]]:
    varqrte = trajectory_error_bounds(trajectory, circuit, H)
    dual = None
    if config.method == EvolverKind.DUAL:
        dual = trajectory_error_bounds(trajectory, circuit, H, config.delta_tau)
    header = ["time", "realized_bures", "varqrte_rate", "varqrte_bound"]
    if dual is not None:
        header += ["dualqrte_rate", "dualqrte_bound"]
    rows = []
    for k, time in enumerate(varqrte.times):
        rate = varqrte.rates[k] if k < len(varqrte.rates) else math.nan
        row = [float(time), float(varqrte.realized[k]), float(rate), float(varqrte.cumulative[k])]
        if dual is not None:
            dual_rate = dual.rates[k] if k < len(dual.rates) else math.nan
            row += [float(dual_rate), float(dual.cumulative[k])]
        rows.append(row)
    summary = {"varqrte_bound_holds": varqrte.holds()}
    if dual is not None:
        summary["dualqrte_bound_holds"] = dual.holds()
    return TableData(header=header, rows=rows), summary


def run_qmetts(config: ExperimentConfig, replica: int) -> ReplicaResult:
    """Energy per site from a QMETTS chain at each configured inverse temperature."""
    result = ReplicaResult(replica, config.seed)
    H = heisenberg(config.system)
    n = config.system.n
    propagator = ExactPropagator(H)
    chain_seed = stream_seed(config.seed, replica, "metts-chain")
    rows, sample_rows = [], []
    for beta in config.betas:
        metts = MettsConfig(
            beta=beta,
            M=config.M,
            basis_schedule=config.basis_schedule,
            basis=config.initial_basis,
            evolver=config.method,
            observable_shots=_shots(config, replica, "shots", config.observable_shots),
            evolution_shots=_shots(config, replica, "evolution", config.shots),
            rng_seed=chain_seed,
            dt=config.dt,
            repetitions=config.ansatz.repetitions,
            delta_tau=config.delta_tau,
            eta=config.eta,
            K0=config.K0,
            K_warm=config.K_warm,
            regularization=config.regularization_policy(),
        )
        chain = qmetts_chain(H, metts)
        exact = propagator.gibbs_average(H, beta) / n
        rows.append([beta, energy_per_site(H, chain), chain.stddev / n, chain.standard_error / n, exact])
        for sample in chain.samples:
            sample_rows.append(
                [beta, sample.index, sample.initial_basis.value, sample.initial_outcome, sample.value / n]
            )
    result.tables["qmetts"] = TableData(
        header=["beta", "energy_per_site", "stddev", "standard_error", "exact_energy_per_site"], rows=rows
    )
    result.tables["qmetts_samples"] = TableData(
        header=["beta", "sample", "basis", "outcome", "energy_per_site"], rows=sample_rows
    )
    result.summary = {
        "evolver": config.method.value,
        "max_deviation_in_stddevs": max(
            abs(row[1] - row[4]) / row[2] if row[2] > 0 else abs(row[1] - row[4]) for row in rows
        ),
    }
    return result


def run_size_scaling(config: ExperimentConfig, replica: int) -> ReplicaResult:
    """Measurements and accuracy of VarQITE and DualQITE per system size under tuned budgets."""
    result = ReplicaResult(replica, config.seed)
    rows = []
    for n in config.n_values:
        setting = config.scaling_settings[str(n)]
        system = HeisenbergSpec(n=n, topology=config.system.topology, J=config.system.J, g_field=config.system.g_field)
        H = heisenberg(system)
        spec = AnsatzSpec(n_qubits=n, repetitions=max(1, math.ceil(math.log2(n))))
        circuit = build_ansatz(spec)
        theta0 = initial_parameter_binding(circuit, InitialState.PLUS_ALL)
        runs = (
            (EvolverKind.VARQTE, setting.varqte_shots, {}),
            (EvolverKind.DUAL, setting.dual_shots, {"K0": setting.K0, "K_warm": setting.K_warm, "eta": setting.eta}),
        )
        for method, shots, overrides in runs:
            method_config = config.with_overrides(method=method.value, mode=EvolutionMode.IMAGINARY.value)
            shot_config = _shots(config, replica, "evolution", shots)
            trajectory = _evolver(method_config, circuit, H, shot_config, **overrides).evolve(theta0)
            reference = exact_reference(trajectory, circuit, H)
            ledger = ResourceLedger.from_trajectory(trajectory)
            rows.append([
                n,
                circuit.d,
                trajectory.method.value,
                shot_config.shots or 0,
                overrides.get("K0", 0),
                overrides.get("K_warm", 0),
                overrides.get("eta", 0.0),
                ledger.total_N,
                integrated_bures(trajectory, reference, circuit),
            ])
    result.tables["size_scaling"] = TableData(
        header=["n", "d", "method", "shots", "K0", "K_warm", "eta", "N", "I_B"], rows=rows
    )
    for tag in (MethodTag.VARQITE_PSR, MethodTag.DUALQITE_PSR):
        method_rows = [row for row in rows if row[2] == tag.value]
        if len(method_rows) >= 2 and all(row[7] > 0 for row in method_rows):
            ds, totals = [r[1] for r in method_rows], [r[7] for r in method_rows]
            result.summary[f"exponent_{tag.value}"] = loglog_slope(ds, totals)
        result.summary[f"mean_I_B_{tag.value}"] = float(np.mean([row[8] for row in method_rows]))
    return result


def run_illustrative(config: ExperimentConfig, replica: int) -> ReplicaResult:
    """One-qubit shared-parameter model: loss landscape, update error against delta_tau and a short run."""
    result = ReplicaResult(replica, config.seed)
    circuit = illustrative_circuit()
    H = PauliSum.from_list([("Z", 1.0)])
    result.tables["loss_curve"] = illustrative_loss_curve(config.theta, config.delta_tau, circuit=circuit, H=H)

    diagnostics = stream_seed(config.seed, replica, "diagnostics")
    exact_rows = delta_tau_scaling(config.delta_taus, circuit, H, dt=config.dt, seed=diagnostics)
    noisy_shots = None if config.exact_shots else config.noisy_shots
    noisy_rows = delta_tau_scaling(config.delta_taus, circuit, H, shots=noisy_shots, dt=config.dt, seed=diagnostics)
    rows = [
        [e[0], e[1], s[1], s[2]] for e, s in zip(exact_rows["rows"], noisy_rows["rows"])
    ]
    result.tables["delta_tau_scaling"] = TableData(
        header=["delta_tau", "exact_error", "sampled_error", "sampled_measurements"], rows=rows
    )

    theta0 = np.array([config.theta])
    dual = config.dual_config(
        _shots(config, replica, "evolution", config.shots),
        mode=EvolutionMode.IMAGINARY,
        gradient_method=GradientMethod.psr(),
        delta_tau=min(config.delta_taus, default=0.01),
    )
    trajectory = DualQTE(circuit, H, dual).evolve(theta0)
    reference = exact_reference(trajectory, circuit, H)
    result.tables["trajectory"], result.tables["resources"] = trajectory_tables(trajectory, circuit, H, reference)
    result.summary = _trajectory_summary(trajectory, circuit, H, reference, 0)
    errors = [row[1] for row in rows]
    if len(errors) >= 2 and all(e > 0 for e in errors):
        result.summary["delta_tau_slope"] = loglog_slope(config.delta_taus, errors)
    return result


def run_product_state_diagnostic(config: ExperimentConfig, replica: int) -> ReplicaResult:
    result = ReplicaResult(replica, config.seed)
    table, exponents = product_state_diagnostic(
        config.n_values,
        shots=None if config.exact_shots else config.shots,
        delta_c=config.delta_c,
        repetitions=config.repetitions,
        dt=config.dt,
        seed=stream_seed(config.seed, replica, "diagnostics"),
    )
    result.tables["product_state_diagnostic"] = table
    result.summary = {f"exponent_{name}" if name != "eps_s_correlation" else name: v for name, v in exponents.items()}
    return result


def run_runtime_table(config: ExperimentConfig, replica: int) -> ReplicaResult:
    result = ReplicaResult(replica, config.seed)
    result.tables["runtime"] = runtime_table(config.ds, config.runtime_repetitions)
    result.summary = {"t_shot_ns": shot_time_ns(config.runtime_repetitions)}
    return result


RUNNERS: Dict[ExperimentKind, Callable[[ExperimentConfig, int], ReplicaResult]] = {
    ExperimentKind.EVOLVE_IMAG: run_evolution,
    ExperimentKind.EVOLVE_REAL: run_evolution,
    ExperimentKind.QMETTS: run_qmetts,
    ExperimentKind.SIZE_SCALING: run_size_scaling,
    ExperimentKind.ILLUSTRATIVE_1Q: run_illustrative,
    ExperimentKind.PRODUCT_STATE_DIAGNOSTIC: run_product_state_diagnostic,
    ExperimentKind.RUNTIME_TABLE: run_runtime_table,
}


def run_replica(config: ExperimentConfig, replica: int) -> ReplicaResult:
    logger.info(f"{config.experiment.value}: replica {replica} (seed {config.seed})")
    return RUNNERS[config.experiment](config, replica)


def aggregate(results: List[ReplicaResult]) -> Dict[str, Any]:
    """Mean and standard deviation of every numeric summary entry across replicas."""
    aggregates: Dict[str, Any] = {}
    keys = sorted({key for result in results for key in result.summary})
    for key in keys:
        values = [result.summary[key] for result in results if key in result.summary]
        if values and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            array = np.asarray(values, dtype=float)
            aggregates[key] = {"mean": float(np.mean(array)), "std": float(np.std(array))}
        elif values and all(isinstance(v, bool) for v in values):
            aggregates[key] = all(values)
    return aggregates
