"""Training loop, checkpoint evaluation and run records."""

from __future__ import annotations

from rewardshift.harness.config import DEFAULT_CHECKPOINTS, DEFAULT_SEEDS, RunConfig, ThresholdSpec
from rewardshift.harness.records import (
    NOT_REACHED,
    BoostedRow,
    CheckpointMetrics,
    RunRecord,
    boosted_reward,
    episodes_to_threshold,
    read_record,
    read_records,
    rolling_mean,
    write_record,
)
from rewardshift.harness.loop import audit_run, evaluate_policy, run_seeds, train

__all__ = [
    "DEFAULT_CHECKPOINTS",
    "DEFAULT_SEEDS",
    "NOT_REACHED",
    "BoostedRow",
    "CheckpointMetrics",
    "RunConfig",
    "RunRecord",
    "ThresholdSpec",
    "audit_run",
    "boosted_reward",
    "episodes_to_threshold",
    "evaluate_policy",
    "read_record",
    "read_records",
    "rolling_mean",
    "run_seeds",
    "train",
    "write_record",
]
