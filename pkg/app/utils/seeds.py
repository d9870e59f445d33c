import numpy as np

from app.constants import SEED_STREAMS


def seed_sequence(master: int, replica: int, stream: str) -> np.random.SeedSequence:
    """Independent named stream per replica: spawn key (replica, stream index)."""
    if stream not in SEED_STREAMS:
        raise ValueError(f"unknown seed stream {stream!r}, expected one of {SEED_STREAMS}")
    return np.random.SeedSequence(master, spawn_key=(replica, SEED_STREAMS.index(stream)))


def stream_rng(master: int, replica: int, stream: str) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(master, replica, stream))


def stream_seed(master: int, replica: int, stream: str) -> int:
    """A 64-bit integer seed derived from the named stream, for configs that take plain seeds."""
    return int(seed_sequence(master, replica, stream).generate_state(1, dtype=np.uint64)[0])
