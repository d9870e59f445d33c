from typing import Dict, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, PositiveFloat

from app.constants import (
    DEFAULT_T_CX_NS,
    DEFAULT_T_MEAS_NS,
    DEFAULT_T_RESET_NS,
    DEFAULT_T_SQRT_X_NS,
    RUNTIME_ANCHOR_D,
    RUNTIME_ANCHORS,
    MethodTag,
)
from app.constants.status import Status
from app.lib.exception import QTEException
from app.types import TableData


class DeviceTimings(BaseModel):
    """Gate, readout and reset durations in nanoseconds."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    t_cx: PositiveFloat = DEFAULT_T_CX_NS
    t_sqrt_x: PositiveFloat = DEFAULT_T_SQRT_X_NS
    t_meas: PositiveFloat = DEFAULT_T_MEAS_NS
    t_reset: PositiveFloat = DEFAULT_T_RESET_NS


def shot_time_ns(r: int, timings: Optional[DeviceTimings] = None) -> float:
    """Duration of one measurement of an r-repetition circuit."""
    timings = timings or DeviceTimings()
    return 2 * r * timings.t_cx + 2 * (r + 1) * timings.t_sqrt_x + timings.t_meas + timings.t_reset


def runtime_estimate(n: int, r: int, N: float, timings: Optional[DeviceTimings] = None) -> float:
    """Seconds needed for N measurements on an n-qubit, r-repetition circuit."""
    if n < 1 or r < 0 or N < 0:
        raise QTEException(Status.INVALID_ARGUMENT, f"invalid runtime inputs n={n}, r={r}, N={N}")
    return N * shot_time_ns(r, timings) * 1e-9


def projected_measurements(d: int, anchor: Tuple[float, float]) -> float:
    """N(d) = N_anchor (d / d_anchor)^exponent."""
    total, exponent = anchor
    return total * (d / RUNTIME_ANCHOR_D) ** exponent


def runtime_table(
    ds: Sequence[int],
    r: int = 3,
    timings: Optional[DeviceTimings] = None,
    anchors: Optional[Dict[MethodTag, Tuple[float, float]]] = None,
) -> TableData:
    """Projected measurements and device runtime per parameter count and method."""
    anchors = anchors or RUNTIME_ANCHORS
    t_shot = shot_time_ns(r, timings)
    rows = []
    for d in ds:
        for method, anchor in anchors.items():
            N = projected_measurements(d, anchor)
            seconds = N * t_shot * 1e-9
            rows.append([d, MethodTag(method).value, N, t_shot, seconds, seconds / 3600.0])
    return TableData(header=["d", "method", "N", "t_shot_ns", "runtime_s", "runtime_h"], rows=rows)
