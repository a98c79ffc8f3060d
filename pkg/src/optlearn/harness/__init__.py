"""Experiment orchestration: shared observations, replications, metrics, tuning."""
from .config import RunConfig, config_from_dict, load_config, parse_policy, parse_policy_flag
from .experiment import THREADS_ENV, TuneResult, run_experiment, run_replications, thread_count, tune
from .io import atomic_write_text, write_csv, write_experiment, write_json
from .ledger import MeasurementHistory, ObservationLedger, substream
from .metrics import ExperimentResult, PolicySummary, aggregate
from .runner import (
    PolicyAbort,
    PolicyRun,
    PolicySpec,
    ReplicationResult,
    draw_truth,
    run_policy,
    run_replication,
    sample_path_values,
    simulate_replication,
)

__all__ = [
    "ExperimentResult",
    "MeasurementHistory",
    "ObservationLedger",
    "PolicyAbort",
    "PolicyRun",
    "PolicySpec",
    "PolicySummary",
    "ReplicationResult",
    "RunConfig",
    "THREADS_ENV",
    "TuneResult",
    "aggregate",
    "atomic_write_text",
    "config_from_dict",
    "draw_truth",
    "load_config",
    "parse_policy",
    "parse_policy_flag",
    "run_experiment",
    "run_policy",
    "run_replication",
    "run_replications",
    "sample_path_values",
    "simulate_replication",
    "substream",
    "thread_count",
    "tune",
    "write_csv",
    "write_experiment",
    "write_json",
]
