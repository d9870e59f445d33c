from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from app.constants import PROBABILITY_TOLERANCE
from app.constants.status import Status
from app.lib.exception import QTEException


class ShotConfig(BaseModel):
    """Measurements per circuit; ``shots=None`` means exact expectation values."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    shots: Optional[PositiveInt] = None
    rng_seed: int = Field(default=0, ge=0, lt=2 ** 64)
    stream_id: int = Field(default=0, ge=0)

    @property
    def exact(self) -> bool:
        return self.shots is None

    def exact_copy(self) -> "ShotConfig":
        return self.model_copy(update={"shots": None})


class ShotSampler:
    """Stateful random stream for one ShotConfig plus a tally of circuits evaluated."""

    def __init__(self, config: ShotConfig):
        self.config = config
        self.rng = np.random.default_rng(np.random.SeedSequence(config.rng_seed, spawn_key=(config.stream_id,)))
        self.circuits = 0

    @property
    def shots(self) -> Optional[int]:
        return self.config.shots

    @property
    def exact(self) -> bool:
        return self.config.exact

    def record(self, circuits: int):
        self.circuits += int(circuits)

    @property
    def measurements(self) -> int:
        return 0 if self.exact else self.circuits * self.config.shots

    def binomial(self, p_true):
        """k/shots with k ~ Binomial(shots, p); p itself in exact mode."""
        p = _check_probability(p_true)
        if self.exact:
            return p
        return self.rng.binomial(self.config.shots, p) / self.config.shots

    def hadamard(self, value, scale: float):
        """Two-outcome estimate of ``value`` in [-scale, scale] with p = (1 + value/scale)/2."""
        value = np.asarray(value, dtype=float)
        if self.exact:
            return value
        p = np.clip((1.0 + value / scale) / 2.0, 0.0, 1.0)
        return (2.0 * self.binomial(p) - 1.0) * scale


def _check_probability(p_true):
    p = np.asarray(p_true, dtype=float)
    if np.any(p < -PROBABILITY_TOLERANCE) or np.any(p > 1.0 + PROBABILITY_TOLERANCE) or not np.all(np.isfinite(p)):
        raise QTEException(Status.INVALID_ARGUMENT, f"probability outside [0, 1]: {p_true}")
    p = np.clip(p, 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


def as_sampler(shots: Union[ShotConfig, ShotSampler, None]) -> ShotSampler:
    if isinstance(shots, ShotSampler):
        return shots
    return ShotSampler(shots if shots is not None else ShotConfig())


def sample_binomial_estimate(p_true: float, shots: Union[ShotConfig, ShotSampler]) -> float:
    return as_sampler(shots).binomial(p_true)
