"""Run records, their on-disk form, and the derived comparison metrics.

A run writes two files named ``<run>__seed<seed>``:

* ``.events.jsonl`` -- one JSON object per line, ``event`` in
  {"start", "checkpoint", "end"}; ``checkpoint`` events carry a
  :class:`CheckpointMetrics`, ``end`` carries the episode-level series.
* ``.summary.json`` -- the complete :class:`RunRecord` (schema version 1),
  which is what reports read.

All rewards in a record are intrinsic. Shaped rewards never leave the
training loop.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

RECORD_VERSION = 1
NOT_REACHED = None


@dataclass(frozen=True)
class CheckpointMetrics:
    step: int
    episode: int
    mean_return: float
    std_return: float
    wall_clock: float
    queries: int = 0
    failures: int = 0
    cache_hits: int = 0

    def comparable(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("wall_clock")
        return d


@dataclass
class RunRecord:
    run_name: str
    seed: int
    env_id: str
    evaluator_kind: str
    checkpoint_unit: str = "steps"
    checkpoints: list[CheckpointMetrics] = field(default_factory=list)
    episode_returns: list[float] = field(default_factory=list)
    episode_decisions: list[bool] = field(default_factory=list)
    threshold: dict[str, Any] | None = None
    episodes_to_threshold: int | None = NOT_REACHED
    total_steps: int = 0
    total_episodes: int = 0
    transition_digest: str = ""
    version: int = RECORD_VERSION

    @property
    def stem(self) -> str:
        return f"{self.run_name}__seed{self.seed}"

    def checkpoint(self, at: int) -> CheckpointMetrics:
        for c in self.checkpoints:
            if self._position(c) == at:
                return c
        raise KeyError(f"no checkpoint at {at}")

    def _position(self, c: CheckpointMetrics) -> int:
        return c.step if self.checkpoint_unit == "steps" else c.episode

    def positions(self) -> list[int]:
        return [self._position(c) for c in self.checkpoints]

    def comparable(self) -> dict[str, Any]:
        """Everything except wall-clock time and labels, for determinism checks."""
        return {
            "env_id": self.env_id,
            "seed": self.seed,
            "checkpoints": [c.comparable() for c in self.checkpoints],
            "episode_returns": self.episode_returns,
            "episode_decisions": self.episode_decisions,
            "episodes_to_threshold": self.episodes_to_threshold,
            "total_steps": self.total_steps,
            "total_episodes": self.total_episodes,
            "transition_digest": self.transition_digest,
        }

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunRecord":
        data = dict(data)
        if data.get("version") != RECORD_VERSION:
            raise ValueError(f"unsupported record version {data.get('version')!r}")
        data["checkpoints"] = [CheckpointMetrics(**c) for c in data["checkpoints"]]
        return cls(**data)


def write_record(record: RunRecord, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    events = directory / f"{record.stem}.events.jsonl"
    lines = [{"event": "start", "run_name": record.run_name, "seed": record.seed,
              "env_id": record.env_id, "evaluator_kind": record.evaluator_kind}]
    lines += [{"event": "checkpoint", **asdict(c)} for c in record.checkpoints]
    lines.append({"event": "end", "total_steps": record.total_steps,
                  "total_episodes": record.total_episodes,
                  "episodes_to_threshold": record.episodes_to_threshold,
                  "transition_digest": record.transition_digest})
    events.write_text("".join(json.dumps(x, sort_keys=True) + "\n" for x in lines), encoding="utf-8")
    summary = directory / f"{record.stem}.summary.json"
    summary.write_text(json.dumps(record.to_dict(), sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return summary


def read_record(path: str | Path) -> RunRecord:
    return RunRecord.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def read_records(directory: str | Path) -> list[RunRecord]:
    paths = sorted(Path(directory).glob("*.summary.json"))
    return [read_record(p) for p in paths]


def rolling_mean(values: Sequence[float], window: int) -> list[float]:
    """Trailing mean over up to ``window`` most recent values (shorter at the start)."""
    out = []
    total = 0.0
    for i, v in enumerate(values):
        total += v
        if i >= window:
            total -= values[i - window]
        out.append(total / min(i + 1, window))
    return out


def episodes_to_threshold(run: RunRecord | Sequence[float], threshold) -> int | None:
    """First episode count at which a full rolling window reaches ``threshold.level``.

    ``run`` is a record (its decision or return series is picked by the metric)
    or a raw per-episode series. Returns ``None`` when the bar is never reached.
    """
    if isinstance(run, RunRecord):
        series = run.episode_decisions if threshold.metric == "profitable_decision_rate" else run.episode_returns
    else:
        series = run
    w = threshold.window
    total = 0.0
    for i, v in enumerate(series):
        total += float(v)
        if i >= w:
            total -= float(series[i - w])
        if i + 1 >= w and total / w >= threshold.level - 1e-12:
            return i + 1
    return NOT_REACHED


@dataclass(frozen=True)
class BoostedRow:
    checkpoint: int
    guided_mean: float
    baseline_mean: float
    delta: float
    per_seed: dict[int, float]


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def boosted_reward(guided: Sequence[RunRecord], baseline: Sequence[RunRecord]) -> list[BoostedRow]:
    """Per-checkpoint pooled-mean difference of guided minus baseline, with per-seed deltas."""
    if not guided or not baseline:
        raise ValueError("both sides need at least one record")
    g = {r.seed: r for r in guided}
    b = {r.seed: r for r in baseline}
    if sorted(g) != sorted(b):
        raise ValueError(f"seed lists differ: {sorted(g)} vs {sorted(b)}")
    positions = None
    for r in list(guided) + list(baseline):
        p = r.positions()
        if positions is None:
            positions = p
        elif p != positions:
            raise ValueError(f"checkpoint lists differ: {positions} vs {p}")
    rows = []
    seeds = sorted(g)
    for at in positions:
        gm = [g[s].checkpoint(at).mean_return for s in seeds]
        bm = [b[s].checkpoint(at).mean_return for s in seeds]
        rows.append(
            BoostedRow(
                checkpoint=at,
                guided_mean=_mean(gm),
                baseline_mean=_mean(bm),
                delta=_mean(gm) - _mean(bm),
                per_seed={s: x - y for s, x, y in zip(seeds, gm, bm)},
            )
        )
    return rows
