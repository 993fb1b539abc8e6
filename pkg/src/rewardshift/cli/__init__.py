"""Manifests, experiment orchestration and reports."""

from rewardshift.cli.main import main

__all__ = ["main"]
