"""Run configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any

from rewardshift.core import ConfigError
from rewardshift.envs import ENV_IDS
from rewardshift.guidance.evaluators import EvaluatorSpec
from rewardshift.learners.base import LearnerConfig

DEFAULT_SEEDS = (42, 43, 44, 45, 46)
DEFAULT_CHECKPOINTS = (100, 1000, 10000)
CHECKPOINT_UNITS = ("steps", "episodes")
THRESHOLD_METRICS = ("profitable_decision_rate", "rolling_return")


@dataclass(frozen=True)
class ThresholdSpec:
    """Rolling-window bar: the metric averaged over the last ``window`` episodes reaches ``level``."""

    metric: str = "profitable_decision_rate"
    window: int = 100
    level: float = 0.9

    def validate(self) -> list[str]:
        errors = []
        if self.metric not in THRESHOLD_METRICS:
            errors.append(f"threshold metric must be one of {THRESHOLD_METRICS}, got {self.metric!r}")
        if self.window < 1:
            errors.append("threshold window must be at least 1")
        return errors


@dataclass(frozen=True)
class RunConfig:
    name: str = "run"
    env_id: str = "blackjack"
    env_params: dict[str, Any] = field(default_factory=dict)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    evaluator: EvaluatorSpec | None = None
    # training stops at the last checkpoint or after ``episodes`` episodes, whichever is first
    episodes: int | None = None
    max_steps: int | None = None
    checkpoints: tuple[int, ...] = DEFAULT_CHECKPOINTS
    checkpoint_unit: str = "steps"
    eval_episodes: int = 100
    eval_enabled: bool = True
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    threshold: ThresholdSpec | None = None

    def validate(self) -> list[str]:
        errors = []
        if self.env_id not in ENV_IDS:
            errors.append(f"env_id must be one of {ENV_IDS}, got {self.env_id!r}")
        errors += [f"learner: {e}" for e in self.learner.validate()]
        if self.evaluator is not None:
            errors += [f"evaluator: {e}" for e in self.evaluator.validate()]
            b = self.evaluator.env_binding
            if b is not None and b != self.env_id:
                errors.append(f"evaluator: bound to {b}, run uses {self.env_id}")
        cps = list(self.checkpoints)
        if not cps:
            errors.append("checkpoints must not be empty")
        elif any(c < 1 for c in cps) or any(b <= a for a, b in zip(cps, cps[1:])):
            errors.append(f"checkpoints must be positive and strictly increasing, got {cps}")
        if self.checkpoint_unit not in CHECKPOINT_UNITS:
            errors.append(f"checkpoint_unit must be one of {CHECKPOINT_UNITS}")
        if not self.seeds:
            errors.append("seed list must not be empty")
        for s in self.seeds:
            if not 0 <= s < 2**64:
                errors.append(f"seed {s} is not a 64-bit unsigned integer")
        if self.episodes is not None and self.episodes < 1:
            errors.append("episodes must be at least 1")
        if self.max_steps is not None and self.max_steps < 1:
            errors.append("max_steps must be at least 1")
        if self.eval_episodes < 1:
            errors.append("eval_episodes must be at least 1")
        if self.threshold is not None:
            errors += self.threshold.validate()
        if self.learner.kind == "slate_q" and self.env_id != "chockale":
            errors.append("slate_q learner needs the chockale environment")
        if self.learner.kind == "linear_q" and self.env_id != "cartpole":
            errors.append("linear_q learner ships features for cartpole only")
        return errors

    def check(self) -> "RunConfig":
        errors = self.validate()
        if errors:
            raise ConfigError("; ".join(errors))
        return self

    @property
    def guided(self) -> bool:
        return self.evaluator is not None and self.evaluator.kind != "null"

    def epsilon_decay(self) -> int:
        """Decay horizon in checkpoint units: explicit, else 20% of the training horizon."""
        if self.learner.epsilon_decay_steps is not None:
            return self.learner.epsilon_decay_steps
        return max(1, int(0.2 * self.checkpoints[-1]))

    def with_evaluator(self, evaluator: EvaluatorSpec | None, name: str | None = None) -> "RunConfig":
        return replace(self, evaluator=evaluator, name=name or self.name)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["learner"] = self.learner.to_dict()
        d["evaluator"] = None if self.evaluator is None else self.evaluator.to_dict()
        d["checkpoints"] = list(self.checkpoints)
        d["seeds"] = list(self.seeds)
        return d
