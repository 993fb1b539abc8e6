"""Command-line entry point: run, report, oracle-dump, validate, reference."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from rewardshift.cli.dump import DUMPERS, oracle_table
from rewardshift.cli.manifest import apply_overrides, load_endpoint, load_manifest, reference_page
from rewardshift.cli.report import (
    format_threshold_table,
    group_runs,
    read_pairings,
    read_report_options,
    threshold_rows,
    write_pairings,
    write_report,
    write_report_options,
)
from rewardshift.core import ConfigError
from rewardshift.guidance.evaluators import EVALUATOR_KINDS
from rewardshift.harness import read_records, run_seeds, write_record

log = logging.getLogger("rewardshift")


def _seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("seed list must not be empty")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rewardshift", description="Reward-shift guided RL experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train every run of a manifest, then write the report")
    run.add_argument("--manifest", required=True, type=Path)
    run.add_argument("--seeds", type=_seeds, help="comma-separated seeds, overriding the manifest")
    run.add_argument("--out", help="output directory, overriding the manifest")
    run.add_argument("--evaluator", choices=EVALUATOR_KINDS, help="evaluator kind for the guided runs")
    run.add_argument("--endpoint-config", type=Path, help="TOML or JSON file with LLM endpoint settings")
    run.add_argument("--jobs", type=int, default=1, help="seeds trained in parallel")

    rep = sub.add_parser("report", help="write CSV and SVG reports from a directory of run records")
    rep.add_argument("records", type=Path, help="directory holding *.summary.json records")
    rep.add_argument("--out", type=Path, help="report directory (default: <records>/../report)")
    rep.add_argument("--manifest", type=Path, help="take pairings and report options from this manifest")

    dump = sub.add_parser("oracle-dump", help="write a scripted oracle's decision table as CSV")
    dump.add_argument("env", choices=sorted(DUMPERS))
    dump.add_argument("--out", type=Path, help="output file (default: stdout)")

    val = sub.add_parser("validate", help="check a manifest and list every problem")
    val.add_argument("--manifest", required=True, type=Path)

    ref = sub.add_parser("reference", help="print the manifest key reference with defaults")
    ref.add_argument("--out", type=Path)
    return p


def cmd_run(args) -> int:
    manifest = load_manifest(args.manifest)
    endpoint = load_endpoint(args.endpoint_config) if args.endpoint_config else None
    manifest = apply_overrides(manifest, args.seeds, args.out, args.evaluator, endpoint)
    out = Path(manifest.out)
    records_dir = out / "records"
    records_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for cfg in manifest.runs:
        log.info("run %s (%s, evaluator %s) on seeds %s", cfg.name, cfg.env_id,
                 cfg.evaluator.kind if cfg.evaluator else "none", list(cfg.seeds))
        for rec in run_seeds(cfg, cfg.seeds, args.jobs):
            write_record(rec, records_dir)
            records.append(rec)
    write_pairings(records_dir, manifest.pairings)
    write_report_options(records_dir, manifest.report)
    report_dir = out / "report"
    result = write_report(records, report_dir, manifest.pairings, **manifest.report)
    _print_summary(records, result, report_dir)
    return 0


def cmd_report(args) -> int:
    records = read_records(args.records)
    if not records:
        print(f"error: no run records in {args.records}", file=sys.stderr)
        return 1
    options = read_report_options(args.records)
    pairings = read_pairings(args.records)
    if args.manifest:
        manifest = load_manifest(args.manifest)
        pairings = manifest.pairings
        options = manifest.report
    out = args.out or args.records.parent / "report"
    result = write_report(records, out, pairings, **options)
    _print_summary(records, result, out)
    return 0


def _print_summary(records, result, out) -> None:
    table = format_threshold_table(threshold_rows(group_runs(records)))
    if table:
        print("Episodes to threshold")
        print(table)
    for guided, baseline in result.incomplete:
        print(f"incomplete pairing: {guided} vs {baseline} (missing or mismatched records)")
    print(f"wrote {len(result.files)} report files to {out}")


def cmd_oracle_dump(args) -> int:
    text = oracle_table(args.env)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args) -> int:
    manifest = load_manifest(args.manifest)
    print(f"{args.manifest}: ok ({len(manifest.runs)} runs, {len(manifest.pairings)} pairings)")
    return 0


def cmd_reference(args) -> int:
    text = reference_page()
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {
    "run": cmd_run,
    "report": cmd_report,
    "oracle-dump": cmd_oracle_dump,
    "validate": cmd_validate,
    "reference": cmd_reference,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
