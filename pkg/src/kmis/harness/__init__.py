"""Seeded multi-trial experiments: configuration, runner, aggregation and outputs."""

from kmis.harness.aggregate import AggregateRow, aggregate
from kmis.harness.config import (
    BandwidthMode,
    DomainSpec,
    EstimatorSpec,
    ExperimentConfig,
    SweepAxis,
    SweepSpec,
    load_experiment_config,
    workers_from_env,
)
from kmis.harness.emit import emit, emit_summary, load_trials
from kmis.harness.runner import ExperimentRunner, TrialRecord, run_experiment

__all__ = [
    "AggregateRow",
    "BandwidthMode",
    "DomainSpec",
    "EstimatorSpec",
    "ExperimentConfig",
    "ExperimentRunner",
    "SweepAxis",
    "SweepSpec",
    "TrialRecord",
    "aggregate",
    "emit",
    "emit_summary",
    "load_experiment_config",
    "load_trials",
    "run_experiment",
    "workers_from_env",
]
