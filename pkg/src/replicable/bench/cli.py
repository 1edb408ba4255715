"""Command-line entry point: ``python -m replicable.bench <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from ..errors import ParameterError
from .harness import ExperimentConfig, estimate_replicability

log = logging.getLogger("replicable.bench")

# subcommand -> experiments it accepts (the first is the default)
SUBCOMMANDS = {
    "rho-estimate": ("r-mean", "quantile", "aff-parity", "ge-nonreplicable", "parity-lift", "ows-learn", "build-dt", "dp2rep-weak"),
    "run-ows": ("ows-learn",),
    "run-parity": ("aff-parity", "ge-nonreplicable"),
    "run-lift": ("parity-lift",),
    "build-dt": ("build-dt",),
    "run-dp2rep": ("dp2rep-weak",),
}

CSV_HEADER = ["trial", "seed_label", "output_a", "output_b", "equal", "err_a", "err_b"]


def _fmt(err) -> str:
    return "" if err is None else repr(float(err))


def write_reports(report, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = out / "report.json"
    summary.write_text(json.dumps(report.summary(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    trials = out / "trials.csv"
    with open(trials, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in report.records:
            writer.writerow([r.trial, r.seed_label, r.output_a, r.output_b, int(r.equal), _fmt(r.err_a), _fmt(r.err_b)])
    return summary, trials


def load_config(args) -> ExperimentConfig:
    allowed = SUBCOMMANDS[args.command]
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
    data.setdefault("experiment", allowed[0])
    for name in ("seed", "trials", "out", "threads"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    config = ExperimentConfig.from_dict(data)
    if config.experiment not in allowed:
        raise ParameterError(f"config.experiment: {config.experiment!r} cannot run under {args.command}")
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="replicable-bench", description="Replicability certification experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, allowed in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"experiments: {', '.join(allowed)}")
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        p.add_argument("--seed", type=int, help="root seed (unsigned 64-bit)")
        p.add_argument("--out", help="output directory for report.json and trials.csv")
        p.add_argument("--trials", type=int, help="number of trial pairs")
        p.add_argument("--threads", type=int, help="worker threads")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = load_config(args)
    except (ParameterError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = estimate_replicability(config)
    out = config.out or f"bench-out/{config.experiment}"
    summary, trials = write_reports(report, out)
    log.info("wrote %s and %s in %.2fs", summary, trials, report.wall_seconds)
    s = report.summary()
    lo, hi = s["wilson95"]
    print(
        f"{config.experiment}: rho_hat={s['rho_hat']:.4f} wilson95=[{lo:.4f}, {hi:.4f}] "
        f"disagreements={s['disagreements']}/{s['trials']} failures={s['failures']} "
        f"success_rate={s['success_rate']} certified={s['certified']}"
    )
    return 0
