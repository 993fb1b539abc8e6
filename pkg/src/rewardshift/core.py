"""Shared domain types, seeded random streams and the environment contract."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

SHIFT_SUPPORT = (-1, 0, 1)

_BLOCK = 4096
_UINT64_MAX = 2**64 - 1


class StateError(RuntimeError):
    """Operation is invalid in the current environment or learner state."""


class ConfigError(ValueError):
    """A configuration value or combination is invalid."""


@dataclass(frozen=True)
class Observation:
    """Environment state in two formats.

    ``box`` is the numeric vector the learners consume; ``human`` is a
    deterministic text rendering of the same vector used in evaluator prompts.
    """

    box: tuple[float, ...]
    human: str
    env_id: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "box", tuple(float(v) for v in self.box))


@dataclass(frozen=True)
class Transition:
    state: Observation
    action: int
    reward: float
    intrinsic_reward: float
    shift: int
    next_state: Observation
    done: bool
    choice: int | None = None


@dataclass(frozen=True)
class ShiftVerdict:
    shift: int
    scale: float = 1.0
    provenance: str = "null"
    raw: str | None = None

    def __post_init__(self) -> None:
        if self.shift not in SHIFT_SUPPORT:
            raise ValueError(f"shift must be one of {SHIFT_SUPPORT}, got {self.shift!r}")
        if not self.scale >= 0:
            raise ValueError(f"scale must be nonnegative, got {self.scale!r}")

    @property
    def value(self) -> float:
        return self.shift * self.scale


def clamp_shift(value: object) -> int:
    """Map an arbitrary evaluator output onto {-1, 0, +1}; anything else is 0."""
    if isinstance(value, bool):
        return 0
    if isinstance(value, (int, np.integer)) and int(value) in SHIFT_SUPPORT:
        return int(value)
    if isinstance(value, float) and value in SHIFT_SUPPORT:
        return int(value)
    return 0


def _stream_key(seed: int, label: str) -> np.ndarray:
    digest = hashlib.blake2b(
        f"{seed}\x00{label}".encode("utf-8"), digest_size=16, person=b"rewardshift-rng"
    ).digest()
    return np.frombuffer(digest, dtype="<u8").copy()


class RngStream:
    """Reproducible random stream identified by ``(seed, label)``.

    The label is hashed together with the seed into a Philox key, so streams
    with different labels share no state. Uniform deviates are drawn from the
    Philox counter-based generator in fixed blocks of 4096 doubles and handed
    out one at a time; the sequence depends only on ``(seed, label)``.

    Gaussian deviates use the Box-Muller transform on two consecutive
    uniforms ``u1, u2``: ``mean + stddev * sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``.
    Only the cosine branch is used, so every Gaussian consumes exactly two
    uniforms.
    """

    def __init__(self, seed: int, stream_label: str) -> None:
        if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) <= _UINT64_MAX:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
        self.seed = int(seed)
        self.stream_label = str(stream_label)
        self._gen = np.random.Generator(np.random.Philox(key=_stream_key(self.seed, self.stream_label)))
        self._buf: list[float] = []
        self._pos = 0
        self.draws = 0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_label={self.stream_label!r}, draws={self.draws})"

    def _refill(self) -> None:
        self._buf = self._gen.random(_BLOCK).tolist()
        self._pos = 0

    def uniform(self) -> float:
        """Next deviate in [0, 1)."""
        if self._pos >= len(self._buf):
            self._refill()
        u = self._buf[self._pos]
        self._pos += 1
        self.draws += 1
        return u

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` consecutive deviates; identical to calling :meth:`uniform` n times."""
        out = np.empty(n)
        i = 0
        while i < n:
            if self._pos >= len(self._buf):
                self._refill()
            take = min(n - i, len(self._buf) - self._pos)
            out[i : i + take] = self._buf[self._pos : self._pos + take]
            self._pos += take
            i += take
        self.draws += n
        return out

    def gaussian(self, mean: float = 0.0, stddev: float = 1.0) -> float:
        if stddev < 0:
            raise ValueError(f"stddev must be nonnegative, got {stddev!r}")
        u1 = self.uniform()
        u2 = self.uniform()
        if stddev == 0:
            return float(mean)
        z = math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2.0 * math.pi * u2)
        return mean + stddev * z

    def gaussians(self, n: int, mean: float = 0.0, stddev: float = 1.0) -> np.ndarray:
        if stddev < 0:
            raise ValueError(f"stddev must be nonnegative, got {stddev!r}")
        u = self.uniforms(2 * n).reshape(n, 2)
        if stddev == 0:
            return np.full(n, float(mean))
        z = np.sqrt(-2.0 * np.log1p(-u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])
        return mean + stddev * z

    def integer(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("n must be positive")
        return min(int(self.uniform() * n), n - 1)

    def categorical(self, weights: Sequence[float]) -> int:
        """Index drawn with probability proportional to ``weights`` (inverse CDF)."""
        total = math.fsum(weights)
        if not total > 0:
            raise ValueError("weights must have a positive sum")
        target = self.uniform() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if target < acc:
                return i
        return len(weights) - 1


def rng_next_uniform(stream: RngStream) -> float:
    return stream.uniform()


def rng_next_gaussian(stream: RngStream, mean: float, stddev: float) -> float:
    return stream.gaussian(mean, stddev)


class Environment(Protocol):
    """Discrete-action episodic environment.

    ``reset`` binds the stream the environment draws from for the rest of the
    episode; ``step`` returns ``(next_obs, intrinsic_reward, done)``.
    """

    env_id: str
    n_actions: int
    obs_dim: int

    def reset(self, stream: RngStream) -> Observation: ...

    def step(self, action: int) -> tuple[Observation, float, bool]: ...

    def render(self, box: Sequence[float]) -> str: ...


def env_reset(env: Environment, stream: RngStream) -> Observation:
    return env.reset(stream)


def env_step(env: Environment, action: int) -> tuple[Observation, float, bool]:
    return env.step(action)


def check_action(action: int, n_actions: int) -> int:
    if isinstance(action, bool) or not isinstance(action, (int, np.integer)):
        raise ValueError(f"action must be an integer index, got {action!r}")
    if not 0 <= int(action) < n_actions:
        raise ValueError(f"action {action} out of range for {n_actions} actions")
    return int(action)


def fmt_num(x: float, digits: int = 3) -> str:
    """Fixed-precision rendering with negative zero folded to zero."""
    s = f"{x:.{digits}f}"
    if s.startswith("-") and float(s) == 0.0:
        s = s[1:]
    return s


EnvFactory = Callable[[], Environment]


@dataclass
class Counter:
    """Mutable tallies shared between an evaluator and the training loop."""

    queries: int = 0
    failures: int = 0
    cache_hits: int = 0

    def snapshot(self) -> dict[str, int]:
        return {"queries": self.queries, "failures": self.failures, "cache_hits": self.cache_hits}
