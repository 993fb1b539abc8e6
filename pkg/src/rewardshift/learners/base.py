"""Learner configuration, exploration schedule, action selection and replay."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

from rewardshift.core import ConfigError, RngStream, Transition

LEARNER_KINDS = ("tabular_q", "tabular_mc", "linear_q", "slate_q")


@dataclass(frozen=True)
class LearnerConfig:
    kind: str = "tabular_q"
    gamma: float = 1.0
    alpha: float | str = 0.1
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int | None = None
    q_init: float = 0.0
    batch_size: int = 32
    buffer_capacity: int = 10_000
    num_tilings: int = 8
    tiles_per_dim: int = 8
    sat_bins: int = 10
    kaleness_bins: int = 10

    def validate(self) -> list[str]:
        errors = []
        if self.kind not in LEARNER_KINDS:
            errors.append(f"kind must be one of {LEARNER_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.gamma <= 1.0:
            errors.append(f"gamma must lie in [0, 1], got {self.gamma!r}")
        if isinstance(self.alpha, str):
            if self.alpha != "visits":
                errors.append(f"alpha must be a positive number or 'visits', got {self.alpha!r}")
        elif not self.alpha > 0:
            errors.append(f"alpha must be positive, got {self.alpha!r}")
        for name in ("epsilon_start", "epsilon_end"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                errors.append(f"{name} must lie in [0, 1], got {v!r}")
        if self.epsilon_decay_steps is not None and self.epsilon_decay_steps < 0:
            errors.append("epsilon_decay_steps must be nonnegative")
        if self.batch_size < 1:
            errors.append("batch_size must be at least 1")
        if self.buffer_capacity < self.batch_size:
            errors.append("buffer_capacity must be at least batch_size")
        for name in ("num_tilings", "tiles_per_dim", "sat_bins", "kaleness_bins"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be at least 1")
        return errors

    def check(self) -> "LearnerConfig":
        errors = self.validate()
        if errors:
            raise ConfigError("; ".join(errors))
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def step_size(self, visits: int) -> float:
        if self.alpha == "visits":
            return 1.0 / max(visits, 1)
        return float(self.alpha)

    def linear_alpha(self) -> float:
        """Per-weight step size for tile-coded features (``alpha / num_tilings``)."""
        if self.alpha == "visits":
            raise ConfigError("linear_q needs a numeric alpha")
        return float(self.alpha) / self.num_tilings


class EpsilonSchedule:
    """Exponential decay from ``start`` to ``end`` over ``decay_steps``, then flat."""

    def __init__(self, start: float, end: float, decay_steps: int) -> None:
        if not (0 <= end <= 1 and 0 <= start <= 1):
            raise ConfigError("epsilon bounds must lie in [0, 1]")
        self.start = start
        self.end = end
        self.decay_steps = max(int(decay_steps), 0)

    def __call__(self, step: int) -> float:
        if self.decay_steps == 0 or step >= self.decay_steps or self.start == self.end:
            return self.end
        if self.start == 0 or self.end == 0:
            frac = step / self.decay_steps
            return self.start + (self.end - self.start) * frac
        return self.start * math.exp(math.log(self.end / self.start) * step / self.decay_steps)


def argmax(values: Sequence[float]) -> int:
    """Index of the largest value; ties go to the lowest index."""
    best = 0
    best_v = values[0]
    for i in range(1, len(values)):
        if values[i] > best_v:
            best, best_v = i, values[i]
    return best


def epsilon_greedy(values: Sequence[float], epsilon: float, stream: RngStream) -> int:
    """With probability ``epsilon`` a uniform random action, else the greedy one.

    Always consumes one uniform, plus a second one when exploring.
    """
    if stream.uniform() < epsilon:
        return stream.integer(len(values))
    return argmax(values)


class ReplayBuffer:
    """Fixed-capacity FIFO ring of transitions sampled uniformly with replacement."""

    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise ConfigError("capacity must be at least 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._items)

    def add(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._cursor] = transition
        self._cursor = (self._cursor + 1) % self.capacity

    def sample_indices(self, batch_size: int, stream: RngStream) -> list[int]:
        n = len(self._items)
        return [stream.integer(n) for _ in range(batch_size)]

    def sample(self, batch_size: int, stream: RngStream) -> list[Transition]:
        if not self._items:
            raise ValueError("cannot sample from an empty buffer")
        return [self._items[i] for i in self.sample_indices(batch_size, stream)]

    def contents(self) -> list[Transition]:
        """Stored transitions, oldest first."""
        if len(self._items) < self.capacity:
            return list(self._items)
        return self._items[self._cursor :] + self._items[: self._cursor]
