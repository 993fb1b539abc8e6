"""Experiment manifests: a TOML file naming runs, pairings and report options.

Layout::

    name = "blackjack"
    out = "runs/blackjack"
    seeds = [42, 43, 44, 45, 46]

    [defaults]              # merged under every run (tables merge key by key)
    env = "blackjack"
    checkpoints = [100, 1000]

    [[runs]]
    name = "baseline"

    [[runs]]
    name = "guided"
    evaluator = { kind = "scripted" }

    [[pairings]]
    guided = "guided"
    baseline = "baseline"

Unknown keys are rejected with their location, and validation reports every
problem it finds rather than stopping at the first.
"""

from __future__ import annotations

import copy
import json
import sys
from dataclasses import MISSING, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from rewardshift.core import ConfigError
from rewardshift.envs import ENV_IDS, make_env
from rewardshift.guidance.evaluators import EvaluatorSpec
from rewardshift.harness.config import DEFAULT_SEEDS, RunConfig, ThresholdSpec
from rewardshift.learners.base import LearnerConfig

TOP_KEYS = {"name", "out", "seeds", "defaults", "runs", "pairings", "report"}
RUN_KEYS = {
    "name", "env", "env_params", "learner", "evaluator", "episodes", "max_steps",
    "checkpoints", "checkpoint_unit", "eval_episodes", "eval_enabled", "threshold",
}
PAIRING_KEYS = {"guided", "baseline"}
REPORT_KEYS = {"rolling_window", "plots"}
REPORT_DEFAULTS = {"rolling_window": 100, "plots": True}

# expected TOML value kinds for scalar run keys
_RUN_TYPES = {
    "name": str, "env": str, "env_params": dict, "learner": dict, "evaluator": dict,
    "episodes": int, "max_steps": int, "checkpoints": list, "checkpoint_unit": str,
    "eval_episodes": int, "eval_enabled": bool, "threshold": dict,
}
# dataclass fields whose default is None need an explicit kind
_NULLABLE = {
    "epsilon_decay_steps": int,
    "env_binding": str,
    "cache_path": str,
    "persona": str,
    "record_path": str,
    "replay_path": str,
}


@dataclass(frozen=True)
class Pairing:
    guided: str
    baseline: str

    @property
    def label(self) -> str:
        return f"{self.guided}_vs_{self.baseline}"


@dataclass
class ExperimentManifest:
    name: str
    runs: list[RunConfig]
    pairings: list[Pairing] = field(default_factory=list)
    out: str = "runs"
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    report: dict[str, Any] = field(default_factory=lambda: dict(REPORT_DEFAULTS))
    source: str | None = None

    def run(self, name: str) -> RunConfig:
        for r in self.runs:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "out": self.out,
            "seeds": list(self.seeds),
            "runs": [r.to_dict() for r in self.runs],
            "pairings": [{"guided": p.guided, "baseline": p.baseline} for p in self.pairings],
            "report": dict(self.report),
        }


def _kind_ok(value: Any, kind: type) -> bool:
    if kind is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, kind)


def _field_kind(f) -> type | None:
    if f.name in _NULLABLE:
        return _NULLABLE[f.name]
    default = f.default
    if default is MISSING and f.default_factory is not MISSING:
        default = f.default_factory()
    if isinstance(default, tuple):
        return list
    if default is None or default is MISSING:
        return None
    return type(default)


def _check_table(data: dict, cls, where: str, errors: list[str]) -> dict:
    """Keep the keys of ``data`` that name fields of ``cls``; log the rest."""
    known = {f.name: f for f in fields(cls)}
    out = {}
    for key, value in data.items():
        f = known.get(key)
        if f is None:
            errors.append(f"{where}.{key}: unknown key (allowed: {', '.join(sorted(known))})")
            continue
        kind = _field_kind(f)
        if key == "alpha" and isinstance(value, str):
            kind = str
        if kind is not None and not _kind_ok(value, kind):
            errors.append(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
            continue
        out[key] = tuple(value) if isinstance(value, list) else value
    return out


def _merge(base: dict, over: dict) -> dict:
    merged = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(merged.get(k), dict):
            merged[k] = _merge(merged[k], v)
        else:
            merged[k] = copy.deepcopy(v)
    return merged


def _build_run(raw: dict, where: str, seeds: tuple[int, ...], errors: list[str]) -> RunConfig | None:
    start = len(errors)
    for key in sorted(set(raw) - RUN_KEYS):
        errors.append(f"{where}.{key}: unknown key (allowed: {', '.join(sorted(RUN_KEYS))})")
    for key, kind in _RUN_TYPES.items():
        if key in raw and not _kind_ok(raw[key], kind):
            errors.append(f"{where}.{key}: expected {kind.__name__}, got {type(raw[key]).__name__}")
    if "name" not in raw:
        errors.append(f"{where}.name: missing")
    if "env" not in raw:
        errors.append(f"{where}.env: missing")
    elif isinstance(raw["env"], str) and raw["env"] not in ENV_IDS:
        errors.append(f"{where}.env: unknown environment {raw['env']!r} (expected one of {', '.join(ENV_IDS)})")
    for key in ("learner", "evaluator", "threshold"):
        if not isinstance(raw.get(key, {}), dict):
            raw = {k: v for k, v in raw.items() if k != key}
    env_ok = len(errors) == start

    learner = LearnerConfig(**_check_table(raw.get("learner", {}), LearnerConfig, f"{where}.learner", errors))
    evaluator = None
    if "evaluator" in raw:
        ev = _check_table(raw["evaluator"], EvaluatorSpec, f"{where}.evaluator", errors)
        if env_ok:
            ev.setdefault("env_binding", raw["env"])
        evaluator = EvaluatorSpec(**ev)
    threshold = None
    if "threshold" in raw:
        threshold = ThresholdSpec(**_check_table(raw["threshold"], ThresholdSpec, f"{where}.threshold", errors))
    env_params = raw.get("env_params", {})
    if env_ok:
        try:
            make_env(raw["env"], env_params)
        except (ConfigError, ValueError, TypeError) as exc:
            errors.append(f"{where}.env_params: {exc}")
    if len(errors) > start:
        # still report value problems in the parts that did parse
        errors += [f"{where}.learner: {e}" for e in learner.validate()]
        if evaluator is not None:
            errors += [f"{where}.evaluator: {e}" for e in evaluator.validate()]
        if threshold is not None:
            errors += [f"{where}.threshold: {e}" for e in threshold.validate()]
        return None

    cfg = RunConfig(
        name=raw["name"],
        env_id=raw["env"],
        env_params=env_params,
        learner=learner,
        evaluator=evaluator,
        episodes=raw.get("episodes"),
        max_steps=raw.get("max_steps"),
        checkpoints=tuple(raw.get("checkpoints", RunConfig.checkpoints)),
        checkpoint_unit=raw.get("checkpoint_unit", "steps"),
        eval_episodes=raw.get("eval_episodes", 100),
        eval_enabled=raw.get("eval_enabled", True),
        seeds=seeds,
        threshold=threshold,
    )
    for e in cfg.validate():
        head, sep, rest = e.partition(": ")
        if sep and head in ("learner", "evaluator"):
            errors.append(f"{where}.{head}: {rest}")
        else:
            errors.append(f"{where}: {e}")
    return cfg


def parse_manifest(data: dict[str, Any], source: str | None = None) -> ExperimentManifest:
    """Validate a decoded manifest; raises ConfigError listing every problem."""
    errors: list[str] = []
    for key in sorted(set(data) - TOP_KEYS):
        errors.append(f"{key}: unknown key (allowed: {', '.join(sorted(TOP_KEYS))})")
    name = data.get("name", Path(source).stem if source else "experiment")
    seeds = data.get("seeds", list(DEFAULT_SEEDS))
    if not isinstance(seeds, list) or not all(_kind_ok(s, int) for s in seeds):
        errors.append("seeds: expected a list of integers")
        seeds = list(DEFAULT_SEEDS)
    seeds_t = tuple(seeds)
    defaults = data.get("defaults", {})
    if not isinstance(defaults, dict):
        errors.append("defaults: expected a table")
        defaults = {}
    for key in sorted(set(defaults) - RUN_KEYS):
        errors.append(f"defaults.{key}: unknown key (allowed: {', '.join(sorted(RUN_KEYS))})")
    defaults = {k: v for k, v in defaults.items() if k in RUN_KEYS}

    runs_raw = data.get("runs", [])
    if not isinstance(runs_raw, list) or not runs_raw:
        errors.append("runs: at least one [[runs]] table is required")
        runs_raw = []
    runs: list[RunConfig] = []
    names: set[str] = set()
    for i, raw in enumerate(runs_raw):
        where = f"runs[{i}]"
        if not isinstance(raw, dict):
            errors.append(f"{where}: expected a table")
            continue
        cfg = _build_run(_merge(defaults, raw), where, seeds_t, errors)
        if cfg is None:
            continue
        if cfg.name in names:
            errors.append(f"{where}.name: duplicate run name {cfg.name!r}")
        names.add(cfg.name)
        runs.append(cfg)

    pairings: list[Pairing] = []
    for i, raw in enumerate(data.get("pairings", [])):
        where = f"pairings[{i}]"
        if not isinstance(raw, dict):
            errors.append(f"{where}: expected a table")
            continue
        for key in sorted(set(raw) - PAIRING_KEYS):
            errors.append(f"{where}.{key}: unknown key (allowed: baseline, guided)")
        missing = [k for k in ("guided", "baseline") if k not in raw]
        for k in missing:
            errors.append(f"{where}.{k}: missing")
        if missing:
            continue
        for k in ("guided", "baseline"):
            if raw[k] not in names:
                errors.append(f"{where}.{k}: no run named {raw[k]!r}")
        pairings.append(Pairing(raw["guided"], raw["baseline"]))

    report = dict(REPORT_DEFAULTS)
    raw_report = data.get("report", {})
    for key, value in raw_report.items():
        if key not in REPORT_KEYS:
            errors.append(f"report.{key}: unknown key (allowed: {', '.join(sorted(REPORT_KEYS))})")
        elif not _kind_ok(value, type(REPORT_DEFAULTS[key])):
            errors.append(f"report.{key}: expected {type(REPORT_DEFAULTS[key]).__name__}")
        else:
            report[key] = value
    if report["rolling_window"] < 1:
        errors.append("report.rolling_window: must be at least 1")
    out = data.get("out", f"runs/{name}")
    if not isinstance(out, str):
        errors.append("out: expected a string")

    if errors:
        where = f"{source}: " if source else ""
        raise ConfigError(f"{where}{len(errors)} problem(s)\n  " + "\n  ".join(errors))
    return ExperimentManifest(name, runs, pairings, out, seeds_t, report, source)


def load_manifest(path: str | Path) -> ExperimentManifest:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read manifest ({exc.strerror})") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: not valid TOML ({exc})") from exc
    return parse_manifest(data, str(path))


def load_endpoint(path: str | Path) -> dict[str, Any]:
    """Endpoint settings from a TOML or JSON file (keys as in ``EndpointConfig``)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return json.loads(text)
    return tomllib.loads(text)


def apply_overrides(
    manifest: ExperimentManifest,
    seeds: tuple[int, ...] | None = None,
    out: str | None = None,
    evaluator: str | None = None,
    endpoint: dict[str, Any] | None = None,
) -> ExperimentManifest:
    """Command-line overrides. ``evaluator`` and ``endpoint`` apply to guided arms only."""
    runs = []
    for r in manifest.runs:
        if seeds is not None:
            r = replace(r, seeds=seeds)
        if r.evaluator is not None and (evaluator is not None or endpoint is not None):
            ev = r.evaluator
            if evaluator is not None:
                ev = replace(ev, kind=evaluator)
            if endpoint is not None:
                ev = replace(ev, endpoint={**ev.endpoint, **endpoint})
            r = r.with_evaluator(ev)
            r.check()
        runs.append(r)
    return replace(
        manifest,
        runs=runs,
        seeds=manifest.seeds if seeds is None else seeds,
        out=manifest.out if out is None else out,
    )


def _default_repr(f) -> str:
    if f.default is not MISSING:
        v = f.default
    elif f.default_factory is not MISSING:
        v = f.default_factory()
    else:
        return "(required)"
    if isinstance(v, tuple):
        v = list(v)
    return json.dumps(v)


def reference_page() -> str:
    """Markdown listing every manifest key with its default."""
    lines = ["# Manifest reference", ""]
    lines += [
        "## Top level", "",
        "| key | default | meaning |", "|---|---|---|",
        "| name | file stem | experiment label |",
        "| out | \"runs/<name>\" | output directory (records/ and report/ go under it) |",
        f"| seeds | {json.dumps(list(DEFAULT_SEEDS))} | seeds every run is trained on |",
        "| defaults | {} | run keys merged under every [[runs]] table |",
        "| runs | (required) | one table per run |",
        "| pairings | [] | tables with `guided` and `baseline` run names |",
        "| report | see below | report options |",
        "",
        "## [[runs]]", "",
        "| key | default |", "|---|---|",
        "| name | (required) |",
        "| env | (required) one of " + ", ".join(ENV_IDS) + " |",
        "| env_params | {} |",
        "| learner | table, see below |",
        "| evaluator | absent = plain baseline; table, see below |",
    ]
    for f in fields(RunConfig):
        if f.name in ("name", "env_id", "env_params", "learner", "evaluator", "seeds"):
            continue
        lines.append(f"| {f.name} | {_default_repr(f)} |")
    for title, cls in (("learner", LearnerConfig), ("evaluator", EvaluatorSpec), ("threshold", ThresholdSpec)):
        lines += ["", f"## [runs.{title}]", "", "| key | default |", "|---|---|"]
        lines += [f"| {f.name} | {_default_repr(f)} |" for f in fields(cls)]
    lines += ["", "## [report]", "", "| key | default |", "|---|---|"]
    lines += [f"| {k} | {json.dumps(v)} |" for k, v in REPORT_DEFAULTS.items()]
    return "\n".join(lines) + "\n"
