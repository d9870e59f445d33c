from .registry import list_experiments, manifest_entry
from .runners import RUNNERS, ReplicaResult, aggregate, run_replica, trajectory_tables
from .schema import EXPERIMENT_DEFAULTS, SIZE_SCALING_SETTINGS, ExperimentConfig, ScalingSetting, load_config
from .writers import format_cell, replica_dir, write_csv, write_json, write_replica, write_run_summary

__all__ = [
    "EXPERIMENT_DEFAULTS",
    "ExperimentConfig",
    "RUNNERS",
    "ReplicaResult",
    "SIZE_SCALING_SETTINGS",
    "ScalingSetting",
    "aggregate",
    "format_cell",
    "list_experiments",
    "load_config",
    "manifest_entry",
    "replica_dir",
    "run_replica",
    "trajectory_tables",
    "write_csv",
    "write_json",
    "write_replica",
    "write_run_summary",
]
