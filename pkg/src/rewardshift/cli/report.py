"""Report emission from run records: CSV tables and static SVG plots.

Everything written here is read off RunRecord fields. The only aggregations
are the pooled seed means of the boosted-reward table and the trailing
rolling mean of episode returns.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from rewardshift.cli.manifest import Pairing
from rewardshift.harness.records import RunRecord, boosted_reward, rolling_mean

SVG_SALT = "rewardshift"
PAIRINGS_FILE = "pairings.json"
OPTIONS_FILE = "report_options.json"


@dataclass
class ReportResult:
    files: list[Path] = field(default_factory=list)
    incomplete: list[tuple[str, str]] = field(default_factory=list)


def _num(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _save_svg(fig, path: Path) -> Path:
    with plt.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def group_runs(records: Sequence[RunRecord]) -> dict[str, list[RunRecord]]:
    runs: dict[str, list[RunRecord]] = defaultdict(list)
    for r in records:
        runs[r.run_name].append(r)
    return {k: sorted(v, key=lambda r: r.seed) for k, v in sorted(runs.items())}


def infer_pairings(runs: dict[str, list[RunRecord]]) -> list[Pairing]:
    """Pair every guided run with the single unguided run of its environment."""
    by_env: dict[str, list[str]] = defaultdict(list)
    for name, recs in runs.items():
        by_env[recs[0].env_id].append(name)
    pairs = []
    for env, names in sorted(by_env.items()):
        plain = [n for n in names if runs[n][0].evaluator_kind == "none"]
        if len(plain) != 1:
            continue
        pairs += [Pairing(n, plain[0]) for n in names if n != plain[0]]
    return pairs


def write_pairings(directory: Path, pairings: Sequence[Pairing]) -> Path:
    path = Path(directory) / PAIRINGS_FILE
    data = [{"guided": p.guided, "baseline": p.baseline} for p in pairings]
    path.write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")
    return path


def read_pairings(directory: Path) -> list[Pairing] | None:
    path = Path(directory) / PAIRINGS_FILE
    if not path.exists():
        return None
    return [Pairing(p["guided"], p["baseline"]) for p in json.loads(path.read_text(encoding="utf-8"))]


def write_report_options(directory: Path, options: dict) -> Path:
    path = Path(directory) / OPTIONS_FILE
    path.write_text(json.dumps(options, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_report_options(directory: Path) -> dict:
    """Options saved by the run that wrote ``directory``; empty when there are none."""
    path = Path(directory) / OPTIONS_FILE
    if not path.exists():
        return {}
    return json.loads(path.read_text(encoding="utf-8"))


def curve_rows(recs: Sequence[RunRecord], window: int) -> list[tuple]:
    rows = []
    for r in recs:
        for i, (ret, roll) in enumerate(zip(r.episode_returns, rolling_mean(r.episode_returns, window)), 1):
            rows.append((r.seed, i, _num(ret), _num(roll)))
    return rows


def plot_curves(name: str, recs: Sequence[RunRecord], window: int, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for r in recs:
        ys = rolling_mean(r.episode_returns, window)
        ax.plot(range(1, len(ys) + 1), ys, linewidth=0.9, label=f"seed {r.seed}")
    ax.set_xlabel("episode")
    ax.set_ylabel(f"rolling return ({window} episodes)")
    ax.set_title(name)
    if recs:
        ax.legend(fontsize="small")
    fig.tight_layout()
    return _save_svg(fig, path)


def plot_boosted(pair: Pairing, rows, unit: str, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    xs = [row.checkpoint for row in rows]
    ax.plot(xs, [row.guided_mean for row in rows], marker="o", label=pair.guided)
    ax.plot(xs, [row.baseline_mean for row in rows], marker="s", label=pair.baseline)
    if len(xs) > 1 and min(xs) > 0:
        ax.set_xscale("log")
    ax.set_xlabel(f"checkpoint ({unit})")
    ax.set_ylabel("mean evaluation return")
    ax.set_title(f"{pair.guided} vs {pair.baseline}")
    ax.legend(fontsize="small")
    fig.tight_layout()
    return _save_svg(fig, path)


def threshold_rows(runs: dict[str, list[RunRecord]]) -> list[tuple]:
    rows = []
    for name, recs in runs.items():
        for r in recs:
            if r.threshold is None:
                continue
            e = r.episodes_to_threshold
            rows.append((name, r.seed, r.threshold["metric"], "not reached" if e is None else e))
    return rows


def format_threshold_table(rows: Sequence[tuple]) -> str:
    """Method-by-seed table of episodes to the threshold."""
    if not rows:
        return ""
    seeds = sorted({r[1] for r in rows})
    table: dict[str, dict[int, object]] = defaultdict(dict)
    for name, seed, _, value in rows:
        table[name][seed] = value
    header = ["method"] + [f"seed {s}" for s in seeds]
    body = [[name] + [str(table[name].get(s, "")) for s in seeds] for name in table]
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    def fmt(row):
        return "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()

    return "\n".join([fmt(header), fmt(["-" * w for w in widths])] + [fmt(b) for b in body]) + "\n"


def write_report(
    records: Sequence[RunRecord],
    out: str | Path,
    pairings: Sequence[Pairing] | None = None,
    rolling_window: int = 100,
    plots: bool = True,
) -> ReportResult:
    """Write all report files for ``records`` under ``out``."""
    if not records:
        raise ValueError("no run records to report on")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    runs = group_runs(records)
    if pairings is None:
        pairings = infer_pairings(runs)
    result = ReportResult()

    checkpoint_rows = []
    for name, recs in runs.items():
        result.files.append(
            _write_csv(out / f"curve_{name}.csv", ["seed", "episode", "return", "rolling_return"],
                       curve_rows(recs, rolling_window))
        )
        if plots:
            result.files.append(plot_curves(name, recs, rolling_window, out / f"curve_{name}.svg"))
        for r in recs:
            for c in r.checkpoints:
                checkpoint_rows.append((
                    name, r.seed, r.evaluator_kind, c.step, c.episode, _num(c.mean_return),
                    _num(c.std_return), c.queries, c.failures, c.cache_hits,
                ))
    result.files.append(_write_csv(
        out / "checkpoints.csv",
        ["run", "seed", "evaluator", "step", "episode", "mean_return", "std_return",
         "queries", "failures", "cache_hits"],
        checkpoint_rows,
    ))

    for pair in pairings:
        if pair.guided not in runs or pair.baseline not in runs:
            result.incomplete.append((pair.guided, pair.baseline))
            continue
        try:
            rows = boosted_reward(runs[pair.guided], runs[pair.baseline])
        except ValueError:
            result.incomplete.append((pair.guided, pair.baseline))
            continue
        seeds = sorted(rows[0].per_seed) if rows else []
        header = ["checkpoint", "guided_mean", "baseline_mean", "boosted"] + [f"delta_seed{s}" for s in seeds]
        body = [
            [row.checkpoint, _num(row.guided_mean), _num(row.baseline_mean), _num(row.delta)]
            + [_num(row.per_seed[s]) for s in seeds]
            for row in rows
        ]
        result.files.append(_write_csv(out / f"boosted_{pair.label}.csv", header, body))
        if plots:
            unit = runs[pair.guided][0].checkpoint_unit
            result.files.append(plot_boosted(pair, rows, unit, out / f"boosted_{pair.label}.svg"))

    th = threshold_rows(runs)
    if th:
        result.files.append(
            _write_csv(out / "episodes_to_threshold.csv", ["run", "seed", "metric", "episodes"], th)
        )
    if result.incomplete:
        result.files.append(_write_csv(out / "incomplete_pairings.csv", ["guided", "baseline"], result.incomplete))
    return result
