import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from app.constants import CostTag, DEFAULT_SHIFT, EvolutionMode, GradientKind
from app.constants.status import Status
from app.lib.exception import QTEException


class GradientMethod(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    method: GradientKind = GradientKind.PARAMETER_SHIFT
    shift: float = DEFAULT_SHIFT
    cost_model_tag: CostTag = CostTag.PSR

    @model_validator(mode="after")
    def _check(self):
        expected = CostTag.PSR if self.method == GradientKind.PARAMETER_SHIFT else CostTag.LCU
        if self.cost_model_tag != expected:
            raise ValueError(f"{self.method.value} is costed as {expected.value}, got {self.cost_model_tag.value}")
        if self.method == GradientKind.PARAMETER_SHIFT and abs(math.sin(self.shift)) < 1e-6:
            raise ValueError(f"parameter shift {self.shift} makes the shift rule singular")
        return self

    @classmethod
    def psr(cls) -> "GradientMethod":
        return cls(method=GradientKind.PARAMETER_SHIFT, cost_model_tag=CostTag.PSR)

    @classmethod
    def lcu(cls) -> "GradientMethod":
        return cls(method=GradientKind.DERIVATIVE_STATE, cost_model_tag=CostTag.LCU)


@dataclass
class EvolutionGradient:
    values: np.ndarray
    kind: EvolutionMode

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise QTEException(Status.NUMERICAL_ABORT, f"non-finite {self.kind.value} evolution gradient")

    def __len__(self) -> int:
        return self.values.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass
class QGTMatrix:
    g: np.ndarray

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        if self.g.ndim != 2 or self.g.shape[0] != self.g.shape[1]:
            raise QTEException(Status.DIMENSION_MISMATCH, f"QGT must be square, got shape {self.g.shape}")

    @property
    def d(self) -> int:
        return self.g.shape[0]

    def max_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.g)[-1])


def gradient_values(b) -> np.ndarray:
    return b.values if isinstance(b, EvolutionGradient) else np.asarray(b, dtype=float)
