import csv
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from app.experiments.runners import ReplicaResult
from app.experiments.schema import ExperimentConfig
from app.types import TableData
from app.utils.logger import logger


def format_cell(value: Any) -> str:
    """Floats at full double precision, everything else as text."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, np.integer):
        return str(int(value))
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def write_csv(path: Path, table: TableData) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(table["header"])
        for row in table["rows"]:
            writer.writerow([format_cell(value) for value in row])
    return path


def to_jsonable(value: Any) -> Any:
    # Non-finite floats become null so the output stays strict JSON.
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Enum):
        return value.value
    return value


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        json.dump(to_jsonable(payload), handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write("\n")
    return path


def replica_dir(out: Path, replica: int) -> Path:
    return out / f"replica_{replica:02d}"


def write_replica(out: Path, config: ExperimentConfig, result: ReplicaResult) -> List[Path]:
    """One CSV per table plus the replica summary carrying its seed and the resolved config."""
    directory = replica_dir(out, result.replica)
    written = [write_csv(directory / f"{name}.csv", table) for name, table in sorted(result.tables.items())]
    summary = {
        **result.summary,
        "replica": result.replica,
        "seed": result.seed,
        "config": config.model_dump(mode="json"),
    }
    written.append(write_json(directory / "summary.json", summary))
    logger.debug(f"replica {result.replica}: wrote {len(written)} files to {directory}")
    return written


def write_run_summary(
    out: Path, config: ExperimentConfig, results: List[ReplicaResult], aggregates: Dict[str, Any]
) -> Path:
    payload = {
        "experiment": config.experiment.value,
        "seed": config.seed,
        "replicas": [
            {"replica": result.replica, "directory": replica_dir(out, result.replica).name, **result.summary}
            for result in results
        ],
        "aggregates": aggregates,
        "config": config.model_dump(mode="json"),
    }
    return write_json(out / "summary.json", payload)
