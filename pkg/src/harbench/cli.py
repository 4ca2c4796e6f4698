"""Command line entry point: ``harbench {ingest,synth,run,audit,lda,report}``.

Exit codes: 0 success, 2 configuration error, 3 when every requested run
was infeasible. ``HARBENCH_SEED`` sets the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .data import DatasetFormatError, SyntheticSpec, emit_dataset, generate_synthetic, ingest_dataset
from .experiment import METHODS_ORDER, ExperimentConfig, lda_fold, run_batch
from .neuralnet import TrainConfig
from .report import FORMATS, emit_report, fold_series_csv, from_csv, from_json, lda_points_csv
from .splitplan import COMBINATIONS, PlanError, audit_leakage, build_plans
from .windowing import WindowConfig

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3


class ConfigError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("HARBENCH_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"HARBENCH_SEED must be an integer, got {raw!r}")


def _add_dataset_args(p):
    p.add_argument("--dataset", help="canonical dataset directory (default: synthetic fixture)")
    p.add_argument("--subjects", type=int, default=6)
    p.add_argument("--activities", type=int, default=4)
    p.add_argument("--trials-per-pair", type=int, default=4)
    p.add_argument("--trial-sec", type=float, default=60.0)
    p.add_argument("--rate", type=float, default=50.0)
    p.add_argument("--channels", type=int, default=3)
    p.add_argument("--trial-noise-corr", type=float, default=0.9)


def _synthetic_spec(args) -> SyntheticSpec:
    try:
        return SyntheticSpec(
            n_subjects=args.subjects,
            n_activities=args.activities,
            trials_per_pair=args.trials_per_pair,
            trial_len_steps=int(round(args.trial_sec * args.rate)),
            sample_rate_hz=args.rate,
            n_channels=args.channels,
            trial_noise_corr=args.trial_noise_corr,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _load(args, seed):
    if args.dataset:
        return ingest_dataset(args.dataset)
    return generate_synthetic(_synthetic_spec(args), seed)


def _write(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_ingest(args) -> int:
    ds = ingest_dataset(args.path, args.format)
    summary = {
        "name": ds.name,
        "sample_rate_hz": ds.sample_rate_hz,
        "channels": [c.name for c in ds.channels],
        "n_trials": len(ds.trials),
        "activities": ds.activities,
        "subjects": ds.subjects,
    }
    if args.out:
        emit_dataset(ds, args.out)
        summary["written_to"] = str(args.out)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_synth(args) -> int:
    ds = generate_synthetic(_synthetic_spec(args), args.seed)
    emit_dataset(ds, args.out)
    print(json.dumps({"name": ds.name, "n_trials": len(ds.trials), "written_to": str(args.out)}))
    return EXIT_OK


def cmd_run(args) -> int:
    tc = TrainConfig(
        max_epochs=args.max_epochs, batch_size=args.batch_size, large_dataset=args.large_dataset, seed=args.seed
    )
    ds = _load(args, args.seed)
    rows = []
    for comb in args.combination:
        hashes = {}
        for m in args.method:
            cfg = ExperimentConfig(
                m,
                comb,
                dataset_path=args.dataset,
                synthetic=None if args.dataset else _synthetic_spec(args),
                window_sec=args.window_sec,
                k=args.k,
                seed=args.seed,
                train_config=tc,
            )
            hashes[m] = cfg.config_hash()
        rows += run_batch(ds, args.method, comb, args.k, args.seed, args.window_sec, tc, hashes)
    _write(emit_report(rows, args.format), args.out)
    if args.series:
        Path(args.series).write_text(fold_series_csv(rows))
    if rows and not any(r.feasible for r in rows):
        for r in rows:
            print(f"infeasible: {r.method} on {r.dataset}: {r.reason}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_audit(args) -> int:
    ds = _load(args, args.seed)
    plans = build_plans(ds, args.combination, args.k, WindowConfig(args.window_sec), args.seed)
    report = audit_leakage(plans[args.repetition] if len(plans) > 1 else plans[0])
    doc = report.to_dict()
    doc["dataset"] = ds.name
    doc["seed"] = args.seed
    _write(json.dumps(doc, indent=2), args.out)
    return EXIT_OK


def cmd_lda(args) -> int:
    ds = _load(args, args.seed)
    _, ptr, ytr, pte, yte = lda_fold(ds, args.combination, args.fold, args.k, args.seed, args.window_sec)
    _write(lda_points_csv(ptr, ytr, pte, yte), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    text = Path(args.input).read_text()
    rows = from_json(text) if args.input.endswith(".json") else from_csv(text)
    _write(emit_report(rows, args.format), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="harbench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("ingest", help="validate a dataset directory and optionally re-emit it")
    q.add_argument("path")
    q.add_argument("--format", default="auto", choices=["auto", "canonical", "continuous"])
    q.add_argument("--out")
    q.set_defaults(func=cmd_ingest)

    q = sub.add_parser("synth", help="write a synthetic dataset in the canonical layout")
    _add_dataset_args(q)
    q.add_argument("--out", required=True)
    q.add_argument("--seed", type=int, default=None)
    q.set_defaults(func=cmd_synth)

    q = sub.add_parser("run", help="evaluate methods under one or more combinations")
    _add_dataset_args(q)
    q.add_argument("--method", nargs="+", required=True, choices=list(METHODS_ORDER))
    q.add_argument("--combination", nargs="+", required=True, choices=list(COMBINATIONS))
    q.add_argument("--k", type=int, default=10)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--window-sec", type=float, default=5.0)
    q.add_argument("--max-epochs", type=int, default=200)
    q.add_argument("--batch-size", type=int, default=1000)
    q.add_argument("--large-dataset", action="store_true", help="use the reduced batch size of 250")
    q.add_argument("--format", default="json", choices=list(FORMATS))
    q.add_argument("--out")
    q.add_argument("--series", help="also write per-fold accuracies as CSV here")
    q.set_defaults(func=cmd_run)

    q = sub.add_parser("audit", help="leakage report for a fold plan")
    _add_dataset_args(q)
    q.add_argument("--combination", required=True, choices=list(COMBINATIONS))
    q.add_argument("--k", type=int, default=10)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--window-sec", type=float, default=5.0)
    q.add_argument("--repetition", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_audit)

    q = sub.add_parser("lda", help="two-component LDA of mean/std features for one fold")
    _add_dataset_args(q)
    q.add_argument("--combination", required=True, choices=list(COMBINATIONS))
    q.add_argument("--fold", type=int, default=0)
    q.add_argument("--k", type=int, default=10)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--window-sec", type=float, default=5.0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_lda)

    q = sub.add_parser("report", help="convert a saved json/csv result table")
    q.add_argument("input")
    q.add_argument("--format", default="markdown", choices=list(FORMATS))
    q.add_argument("--out")
    q.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        return args.func(args)
    except (ConfigError, DatasetFormatError, PlanError, ValueError, FileNotFoundError) as exc:
        print(f"harbench: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
