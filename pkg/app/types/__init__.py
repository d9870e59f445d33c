from typing import Any, Dict, List, Optional

from typing_extensions import NotRequired, Required, TypedDict


class StepRecord(TypedDict):
    step: int
    time: float
    circuits: int
    shots: Optional[int]
    measurements: int
    iterations: int
    b_norm: float
    theta_dot: List[float]
    loss_trace: NotRequired[List[float]]
    gradient_norm_trace: NotRequired[List[float]]
    delta_theta: NotRequired[List[float]]
    final_loss: NotRequired[float]
    regularization: NotRequired[float]


class FeasibilityReport(TypedDict):
    ok: bool
    violations: List[int]
    max_feasible: float


class ManifestEntry(TypedDict):
    name: str
    reproduces: str
    figure: str
    description: str
    defaults: Required[Dict[str, Any]]


class TableData(TypedDict):
    header: List[str]
    rows: List[List[Any]]
