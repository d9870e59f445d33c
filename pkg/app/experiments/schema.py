import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from app.config.settings import BaseConfig
from app.constants import (
    DEFAULT_REPLICAS,
    Basis,
    BasisSchedule,
    CostTag,
    EvolutionMode,
    EvolverKind,
    ExperimentKind,
    InitialState,
    RegularizationKind,
)
from app.constants.status import Status
from app.lib.estimators import GradientMethod, ShotConfig
from app.lib.evolution import DualConfig, EvolutionConfig, RegularizationPolicy, check_time_grid
from app.lib.exception import QTEException
from app.lib.hamiltonian import HeisenbergSpec
from app.lib.sim import AnsatzSpec


class ScalingSetting(BaseModel):
    """Per-size measurement budget of the size-scaling benchmark."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    varqte_shots: PositiveInt
    dual_shots: PositiveInt
    K0: PositiveInt
    K_warm: PositiveInt
    eta: float = Field(gt=0)


# Budgets tuned so both methods reach an integrated Bures distance of about 0.1.
SIZE_SCALING_SETTINGS: Dict[int, Dict[str, Any]] = {
    4: {"varqte_shots": 500, "dual_shots": 500, "K0": 100, "K_warm": 15, "eta": 0.07},
    6: {"varqte_shots": 1500, "dual_shots": 600, "K0": 200, "K_warm": 25, "eta": 0.07},
    8: {"varqte_shots": 2500, "dual_shots": 1000, "K0": 100, "K_warm": 20, "eta": 0.1},
}

EXPERIMENT_DEFAULTS: Dict[ExperimentKind, Dict[str, Any]] = {
    ExperimentKind.EVOLVE_IMAG: {
        "system": {"n": 12, "topology": "circle", "J": 0.25, "g_field": -1.0},
        "ansatz": {"family": "efficient_su2", "entangler": "pairwise_cx", "repetitions": 3},
        "mode": "imaginary",
        "dt": 0.01,
        "T": 2.0,
    },
    ExperimentKind.EVOLVE_REAL: {
        "system": {"n": 4, "topology": "chain", "J": 0.25, "g_field": -1.0},
        "ansatz": {"family": "alternating_xy", "entangler": "chain_rzz", "repetitions": 3},
        "mode": "real",
        "dt": 0.02,
        "T": 2.0,
        "delta_tau": 1e-3,
    },
    ExperimentKind.QMETTS: {
        "system": {"n": 6, "topology": "chain", "J": 0.25, "g_field": -1.0},
        "ansatz": {"family": "efficient_su2", "entangler": "pairwise_cx", "repetitions": 2},
        "betas": [0.5, 1.0, 2.0],
        "M": 25,
        "observable_shots": 1024,
    },
    ExperimentKind.SIZE_SCALING: {
        "system": {"n": 4, "topology": "circle", "J": 0.25, "g_field": -1.0},
        "n_values": [4, 6, 8],
        "scaling_settings": {str(n): s for n, s in SIZE_SCALING_SETTINGS.items()},
        "T": 2.0,
    },
    ExperimentKind.ILLUSTRATIVE_1Q: {
        "system": {"n": 2, "topology": "chain", "J": 0.25, "g_field": -1.0},
        "delta_tau": 0.5,
        "delta_taus": [1e-1, 1e-2, 1e-3],
        "noisy_shots": 100,
        "T": 1.0,
    },
    ExperimentKind.PRODUCT_STATE_DIAGNOSTIC: {
        "system": {"n": 2, "topology": "chain", "J": 0.25, "g_field": -1.0},
        "n_values": list(range(2, 11)),
        "shots": 1000,
        "regularization": "diagonal_shift",
        "repetitions": 10,
    },
    ExperimentKind.RUNTIME_TABLE: {
        "system": {"n": 12, "topology": "circle", "J": 0.25, "g_field": -1.0},
        "ds": [24, 48, 72, 96, 120, 240, 480],
        "runtime_repetitions": 3,
    },
}

# Experiments that evolve the configured Heisenberg system with the configured ansatz.
_SYSTEM_EXPERIMENTS = (ExperimentKind.EVOLVE_IMAG, ExperimentKind.EVOLVE_REAL, ExperimentKind.QMETTS)


def _merge(defaults: Dict[str, Any], values: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(defaults)
    for key, value in values.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ExperimentConfig(BaseModel):
    """One run document. Values absent from the document take the experiment's defaults."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: ExperimentKind
    system: HeisenbergSpec = Field(default_factory=HeisenbergSpec)
    ansatz: AnsatzSpec
    method: EvolverKind = EvolverKind.DUAL
    mode: EvolutionMode = EvolutionMode.IMAGINARY
    gradient_method: Optional[CostTag] = None
    initial_state: InitialState = InitialState.PLUS_ALL
    initial_basis: Basis = Basis.X
    initial_outcome: Optional[str] = None

    dt: float = Field(default=0.01, gt=0)
    T: float = Field(default=2.0, ge=0)
    delta_tau: float = Field(default=0.01, gt=0)
    eta: float = Field(default=0.1, gt=0)
    K0: PositiveInt = 100
    K_warm: PositiveInt = 10
    tolerance: Optional[float] = Field(default=None, gt=0)
    shots: Optional[PositiveInt] = None
    delta_c: float = Field(default=1e-2, ge=0)
    regularization: RegularizationKind = RegularizationKind.L_CURVE

    betas: List[float] = Field(default_factory=lambda: [1.0])
    M: PositiveInt = 25
    basis_schedule: BasisSchedule = BasisSchedule.ALTERNATING_XY
    observable_shots: Optional[PositiveInt] = 1024
    # Forces exact expectation values everywhere, including per-size and diagnostic budgets.
    exact_shots: bool = False

    n_values: List[int] = Field(default_factory=list)
    scaling_settings: Dict[str, ScalingSetting] = Field(default_factory=dict)
    theta: float = math.pi / 4
    delta_taus: List[float] = Field(default_factory=list)
    noisy_shots: PositiveInt = 100
    repetitions: PositiveInt = 10
    ds: List[int] = Field(default_factory=list)
    runtime_repetitions: int = Field(default=3, ge=0)

    seed: int = Field(default=BaseConfig.QTE_SEED, ge=0)
    replicas: PositiveInt = DEFAULT_REPLICAS
    output_path: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data):
        if not isinstance(data, dict) or "experiment" not in data:
            return data
        try:
            kind = ExperimentKind(data["experiment"])
        except ValueError:
            return data
        merged = _merge(EXPERIMENT_DEFAULTS[kind], data)
        ansatz = merged.get("ansatz")
        if ansatz is None or isinstance(ansatz, dict):
            ansatz = dict(ansatz or {})
            system = merged["system"]
            ansatz.setdefault("n_qubits", system["n"] if isinstance(system, dict) else system.n)
            merged["ansatz"] = ansatz
        return merged

    @model_validator(mode="after")
    def _check(self):
        if any(beta <= 0 for beta in self.betas):
            raise ValueError(f"inverse temperatures must be positive, got {self.betas}")
        if any(delta_tau <= 0 for delta_tau in self.delta_taus):
            raise ValueError(f"time perturbations must be positive, got {self.delta_taus}")
        if self.K_warm > self.K0:
            raise ValueError(f"K_warm={self.K_warm} exceeds K0={self.K0}")
        if self.experiment in _SYSTEM_EXPERIMENTS and self.ansatz.n_qubits != self.system.n:
            raise ValueError(f"ansatz acts on {self.ansatz.n_qubits} qubits, system has {self.system.n}")
        if self.experiment in (ExperimentKind.EVOLVE_IMAG, ExperimentKind.EVOLVE_REAL, ExperimentKind.ILLUSTRATIVE_1Q):
            check_time_grid(self.dt, self.T)
            if self.method == EvolverKind.EXACT:
                raise ValueError("trajectory experiments need a variational method")
        if self.experiment == ExperimentKind.SIZE_SCALING:
            missing = [n for n in self.n_values if str(n) not in self.scaling_settings]
            if missing:
                raise ValueError(f"no scaling settings for n={missing}")
        if self.initial_outcome is not None and len(self.initial_outcome) != self.system.n:
            raise ValueError(f"initial outcome {self.initial_outcome!r} does not match {self.system.n} spins")
        return self

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        """Re-validated copy; ``None`` values are ignored."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        return ExperimentConfig.model_validate({**self.model_dump(mode="json"), **updates})

    def with_exact_shots(self) -> "ExperimentConfig":
        return ExperimentConfig.model_validate(
            {**self.model_dump(mode="json"), "shots": None, "observable_shots": None, "exact_shots": True}
        )

    def gradient(self) -> Optional[GradientMethod]:
        if self.gradient_method is None:
            return None
        return GradientMethod.psr() if self.gradient_method == CostTag.PSR else GradientMethod.lcu()

    def regularization_policy(self) -> RegularizationPolicy:
        if self.regularization == RegularizationKind.DIAGONAL_SHIFT:
            return RegularizationPolicy.diagonal_shift(self.delta_c)
        if self.regularization == RegularizationKind.TRUNCATED_SVD:
            return RegularizationPolicy.truncated_svd(self.delta_c)
        return RegularizationPolicy()

    def evolution_config(self, shots: ShotConfig, **overrides) -> EvolutionConfig:
        values = dict(
            mode=self.mode,
            dt=self.dt,
            T=self.T,
            shots=shots,
            gradient_method=self.gradient(),
            regularization=self.regularization_policy(),
        )
        return EvolutionConfig(**{**values, **overrides})

    def dual_config(self, shots: ShotConfig, **overrides) -> DualConfig:
        values = dict(
            mode=self.mode,
            dt=self.dt,
            T=self.T,
            delta_tau=self.delta_tau,
            eta=self.eta,
            K0=self.K0,
            K_warm=self.K_warm,
            shots=shots,
            gradient_method=self.gradient(),
            tolerance=self.tolerance,
        )
        return DualConfig(**{**values, **overrides})


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Reads one JSON run document. Unreadable or malformed files raise CONFIG_ERROR."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise QTEException(Status.CONFIG_ERROR, f"cannot read run config {path}: {exc}")
    if not isinstance(document, dict):
        raise QTEException(Status.CONFIG_ERROR, f"run config {path} must be a JSON object")
    return ExperimentConfig.model_validate(document)
