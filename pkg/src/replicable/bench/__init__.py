"""Replicability certification harness and experiment CLI."""

from __future__ import annotations

from .cli import main, write_reports
from .experiments import EXPERIMENTS, build_experiment
from .harness import (
    ExperimentConfig,
    ReplicabilityReport,
    TrialRecord,
    estimate_error,
    estimate_replicability,
    serialize_output,
    wilson_interval,
)

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "ReplicabilityReport",
    "TrialRecord",
    "build_experiment",
    "estimate_error",
    "estimate_replicability",
    "main",
    "serialize_output",
    "wilson_interval",
    "write_reports",
]
