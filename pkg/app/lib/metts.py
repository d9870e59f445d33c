import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from app.constants import Basis, BasisSchedule, EvolutionMode, EvolverKind, InitialState
from app.constants.status import Status
from app.lib.estimators import ShotConfig, ShotSampler, expectation_estimate
from app.lib.evolution import DualConfig, EvolutionConfig, RegularizationPolicy, dualqte_evolve, varqte_evolve
from app.lib.exception import QTEException
from app.lib.hamiltonian import ExactPropagator, PauliSum, expectation
from app.lib.sim import AnsatzSpec, StateVector, build_ansatz, initial_parameter_binding, rot_pair_for_basis
from app.lib.sim.statevector import HADAMARD, S_DAGGER
from app.utils.logger import logger

_SQRT_HALF = 1.0 / math.sqrt(2.0)

# Single-qubit eigenstates; "0" is the +1 eigenvector.
_EIGENSTATES = {
    (Basis.X, "0"): np.array([_SQRT_HALF, _SQRT_HALF]),
    (Basis.X, "1"): np.array([_SQRT_HALF, -_SQRT_HALF]),
    (Basis.Y, "0"): np.array([_SQRT_HALF, 1j * _SQRT_HALF]),
    (Basis.Y, "1"): np.array([_SQRT_HALF, -1j * _SQRT_HALF]),
    (Basis.Z, "0"): np.array([1.0, 0.0]),
    (Basis.Z, "1"): np.array([0.0, 1.0]),
}


class MettsConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    beta: float = Field(gt=0)
    M: PositiveInt = 25
    basis_schedule: BasisSchedule = BasisSchedule.ALTERNATING_XY
    # Collapse basis of a fixed schedule.
    basis: Basis = Basis.X
    # None means H itself.
    observable: Optional[PauliSum] = None
    evolver: EvolverKind = EvolverKind.DUAL
    observable_shots: ShotConfig = Field(default_factory=lambda: ShotConfig(shots=1024))
    evolution_shots: ShotConfig = Field(default_factory=ShotConfig)
    rng_seed: int = Field(default=0, ge=0, lt=2 ** 64)
    burn_in: int = Field(default=0, ge=0)
    dt: float = Field(default=0.01, gt=0)
    repetitions: PositiveInt = 2
    delta_tau: float = Field(default=0.01, gt=0)
    eta: float = Field(default=0.1, gt=0)
    K0: PositiveInt = 100
    K_warm: PositiveInt = 10
    regularization: RegularizationPolicy = Field(default_factory=RegularizationPolicy)

    def basis_at(self, index: int) -> Basis:
        if self.basis_schedule == BasisSchedule.FIXED:
            return self.basis
        return Basis.X if index % 2 == 0 else Basis.Y


@dataclass
class MettsSample:
    index: int
    initial_basis: Basis
    initial_outcome: str
    value: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise QTEException(Status.NUMERICAL_ABORT, f"non-finite observable estimate in sample {self.index}")


@dataclass
class MettsResult:
    samples: List[MettsSample]
    burn_in: int = 0

    @property
    def values(self) -> np.ndarray:
        return np.array([sample.value for sample in self.samples[self.burn_in:]])

    @property
    def mean(self) -> float:
        values = self.values
        return float(values.mean()) if values.size else math.nan

    @property
    def stddev(self) -> float:
        values = self.values
        return float(values.std(ddof=1)) if values.size > 1 else 0.0

    @property
    def standard_error(self) -> float:
        values = self.values
        return self.stddev / math.sqrt(values.size) if values.size else math.nan


def product_state(basis: Basis, outcome: str) -> StateVector:
    return StateVector.product([_EIGENSTATES[(Basis(basis), bit)] for bit in outcome])


def collapse_to_product(psi: StateVector, basis: Basis, rng: np.random.Generator) -> str:
    """Projective measurement of every qubit in ``basis``; character k is the outcome of qubit k."""
    rotated = psi
    basis = Basis(basis)
    for q in range(psi.n_qubits):
        if basis == Basis.X:
            rotated = rotated.apply(HADAMARD, [q])
        elif basis == Basis.Y:
            rotated = rotated.apply(S_DAGGER, [q]).apply(HADAMARD, [q])
    index = int(rng.choice(2 ** psi.n_qubits, p=rotated.probabilities()))
    return "".join(str((index >> q) & 1) for q in range(psi.n_qubits))


class _ChainEvolver:
    """Prepares |outcome> in ``basis`` and evolves it to imaginary time beta/2."""

    def __init__(self, H: PauliSum, config: MettsConfig):
        self.H = H
        self.config = config
        self.T = config.beta / 2
        self.propagator = ExactPropagator(H) if config.evolver == EvolverKind.EXACT else None
        self.circuits = {}

    def _circuit(self, basis: Basis):
        rot_pair = rot_pair_for_basis(basis)
        if rot_pair not in self.circuits:
            spec = AnsatzSpec(n_qubits=self.H.n_qubits, repetitions=self.config.repetitions, rot_pair=rot_pair)
            self.circuits[rot_pair] = build_ansatz(spec)
        return self.circuits[rot_pair]

    def __call__(self, basis: Basis, outcome: str, index: int):
        if self.propagator is not None:
            return self.propagator.evolve(product_state(basis, outcome), self.T, EvolutionMode.IMAGINARY), {}

        circuit = self._circuit(basis)
        theta0 = initial_parameter_binding(circuit, InitialState.PRODUCT, basis, outcome)
        steps = max(1, int(round(self.T / self.config.dt)))
        shots = self.config.evolution_shots.model_copy(
            update={"rng_seed": self.config.rng_seed, "stream_id": 2 + index}
        )
        common = dict(mode=EvolutionMode.IMAGINARY, dt=self.T / steps, T=self.T, shots=shots)
        if self.config.evolver == EvolverKind.DUAL:
            trajectory = dualqte_evolve(
                circuit,
                self.H,
                theta0,
                DualConfig(
                    delta_tau=self.config.delta_tau,
                    eta=self.config.eta,
                    K0=self.config.K0,
                    K_warm=self.config.K_warm,
                    **common,
                ),
            )
        else:
            trajectory = varqte_evolve(
                circuit, self.H, theta0, EvolutionConfig(regularization=self.config.regularization, **common)
            )
        metadata = {
            "method": trajectory.method.value,
            "steps": len(trajectory.steps),
            "circuits": trajectory.total_circuits,
            "measurements": trajectory.total_measurements,
        }
        return circuit.run(trajectory.final_theta), metadata


def qmetts_chain(H: PauliSum, config: MettsConfig) -> MettsResult:
    """Minimally entangled typical thermal states chain.

    Sample m starts from a product state in basis m, evolves to beta/2, records the
    observable and collapses in basis m+1 to seed the next sample. The first state is
    all zeros in the first basis.
    """
    observable = config.observable if config.observable is not None else H
    if observable.n_qubits != H.n_qubits:
        raise QTEException(Status.DIMENSION_MISMATCH, "observable and Hamiltonian act on different qubit counts")
    rng = np.random.default_rng(config.rng_seed)
    observable_shots = config.observable_shots.model_copy(update={"rng_seed": config.rng_seed, "stream_id": 1})
    sampler = ShotSampler(observable_shots)
    evolve = _ChainEvolver(H, config)

    result = MettsResult(samples=[], burn_in=min(config.burn_in, config.M - 1))
    basis, outcome = config.basis_at(0), "0" * H.n_qubits
    logger.info(
        f"QMETTS: n={H.n_qubits}, beta={config.beta}, M={config.M}, evolver={config.evolver.value}, "
        f"schedule={config.basis_schedule.value}"
    )
    for m in range(config.M):
        try:
            psi, metadata = evolve(basis, outcome, m)
        except QTEException as exc:
            logger.error(f"QMETTS: evolution of sample {m} failed: {exc.msg}")
            raise QTEException(exc.code, f"sample {m}: {exc.msg}", partial=result)
        value = expectation_estimate(psi, observable, sampler)
        result.samples.append(MettsSample(m, basis, outcome, value, metadata))
        logger.debug(f"sample {m}: basis={basis.value} outcome={outcome} A={value:.6f}")
        basis = config.basis_at(m + 1)
        outcome = collapse_to_product(psi, basis, rng)
    logger.info(f"QMETTS: mean={result.mean:.6f} stddev={result.stddev:.6f}")
    return result


def energy_per_site(H: PauliSum, state: Union[StateVector, MettsResult, float], n: Optional[int] = None) -> float:
    """<H>/n from a state, a chain of energy samples or a precomputed energy."""
    n = H.n_qubits if n is None else n
    if n < 1:
        raise QTEException(Status.INVALID_ARGUMENT, f"n must be positive, got {n}")
    if isinstance(state, StateVector):
        return expectation(H, state) / n
    if isinstance(state, MettsResult):
        return state.mean / n
    return float(state) / n
