"""Command-line entry point: partition, test, simulate, rho, calibrate."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import simharness as sh
from .classifiers import ClassifierSpec
from .contingency import write_rho_csv
from .partition import Dataset, bcv_5x2_partitions, pairwise_overlaps
from .significance import DEFAULT_ALPHA, TEST_NAMES, validate_test_names


class UsageError(Exception):
    pass


def _tests(text: str) -> tuple[str, ...]:
    try:
        return validate_test_names([t.strip() for t in text.split(",") if t.strip()])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _spec(text: str) -> ClassifierSpec:
    try:
        return ClassifierSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _alpha(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bcvmcnemar", description="5x2 BCV McNemar test and comparison baselines")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="dump a 5x2 BCV partition plan as JSON")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--n", type=_positive, help="number of records")
    src.add_argument("--data", help="CSV data set (stratified by label)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = sub.add_parser("test", help="compare two classifiers on a CSV data set")
    p.add_argument("--data", required=True)
    p.add_argument("--algo-a", type=_spec, required=True)
    p.add_argument("--algo-b", type=_spec, required=True)
    p.add_argument("--tests", type=_tests, default=("mcnemar_bcv_5x2",))
    p.add_argument("--alpha", type=_alpha, default=DEFAULT_ALPHA)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rho1", type=float, default=0.5)
    p.add_argument("--rho2", type=float, default=0.5)
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="run a JSON scenario config")
    p.add_argument("--config", required=True)
    p.add_argument("--reps", type=_positive, help="override the replication count")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--alpha", type=_alpha, help="override the significance level")
    p.add_argument("--tests", type=_tests, help="override the test list")
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--out", help="CSV path; the JSON report goes next to it")

    p = sub.add_parser("rho", help="estimate (rho1, rho2) over data sources and algorithm pairs")
    p.add_argument("--data", action="append", required=True,
                   help="exp6, simple:delta=D, epsilon:epsilon=E or a CSV path (repeatable)")
    p.add_argument("--algo-a", type=_spec, action="append", default=[])
    p.add_argument("--algo-b", type=_spec, action="append", default=[])
    p.add_argument("--n", type=_positive, default=300, help="records per sample")
    p.add_argument("--reps", type=_positive, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--out")

    p = sub.add_parser("calibrate", help="true-error curves over the calibration grid or sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--reps", type=_positive)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--out")
    return ap


def _load_config(args) -> sh.ScenarioConfig:
    with open(args.config) as fh:
        d = json.load(fh)
    if getattr(args, "reps", None) is not None:
        d["replications"] = args.reps
        if d.get("calibration"):
            d["calibration"] = {**d["calibration"], "reps": args.reps}
    for key, attr in (("master_seed", "seed"), ("alpha", "alpha"), ("tests", "tests")):
        if getattr(args, attr, None) is not None:
            d[key] = list(getattr(args, attr)) if attr == "tests" else getattr(args, attr)
    return sh.ScenarioConfig.from_dict(d)


def cmd_partition(args) -> int:
    if args.data:
        ds = Dataset.from_csv(args.data)
        ps = bcv_5x2_partitions(ds, args.seed, stratify=True)
    else:
        ps = bcv_5x2_partitions(args.n, args.seed)
    _write(args.out, ps.to_json() + "\n")
    if args.out:
        ov = pairwise_overlaps(ps)
        print(f"n={ps.n}  block sizes={[len(b) for b in ps.blocks]}  training overlaps {min(ov)}..{max(ov)}")
    return 0


def cmd_test(args) -> int:
    data = Dataset.from_csv(args.data)
    results = sh.compare_on_dataset(
        data, args.algo_a, args.algo_b, args.tests, args.seed, args.alpha, rho1=args.rho1, rho2=args.rho2
    )
    doc = {
        "data": str(args.data),
        "n": data.n,
        "algo_a": str(args.algo_a),
        "algo_b": str(args.algo_b),
        "seed": args.seed,
        "results": [r.to_dict() for r in results.values()],
    }
    _write(args.out, json.dumps(doc, indent=2) + "\n")
    if args.out:
        for r in results.values():
            print(r.verdict())
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    report = sh.run_scenario(cfg, workers=args.workers)
    _write(args.out, report.to_csv())
    if args.out:
        Path(args.out).with_suffix(".json").write_text(report.to_json())
        for r in report.rows:
            at = "" if r.sweep_value is None else f" {r.sweep_param}={r.sweep_value:g}"
            print(f"{r.test:<22}{at:<16} rate={r.rejection_rate:.3f} (se {r.se:.3f}, untestable {r.untestable})")
    print(f"{cfg.replications} replications in {report.runtime_seconds:.1f}s", file=sys.stderr)
    return 0


def cmd_rho(args) -> int:
    if len(args.algo_a) != len(args.algo_b):
        raise UsageError("--algo-a and --algo-b must be given the same number of times")
    pairs = [(str(a), str(b)) for a, b in zip(args.algo_a, args.algo_b)]
    sources = [sh.builtin_source(s) for s in args.data]
    if not pairs and any(s.epsilon is None for s in sources):
        raise UsageError("model-backed sources need at least one --algo-a/--algo-b pair")
    records = sh.rho_sweep(sources, pairs, args.n, args.reps, args.seed, args.workers)
    out = args.out
    if out is None:
        write_rho_csv([r.as_row() for r in records], sys.stdout)
    else:
        write_rho_csv([r.as_row() for r in records], out)
        for r in records:
            if r.estimate is None:
                print(f"{r.dataset} {r.alg_a} vs {r.alg_b}: undefined ({r.note})")
            else:
                e = r.estimate
                print(f"{r.dataset} {r.alg_a} vs {r.alg_b}: rho1={e.rho1:.3f} rho2={e.rho2:.3f}")
    return 0


def cmd_calibrate(args) -> int:
    cfg = _load_config(args)
    curve = sh.true_error_curve(cfg, reps=args.reps, workers=args.workers)
    _write(args.out, curve.to_csv())
    if args.out and cfg.sweep_param == "lambda":
        for lam in cfg.sweep_values:
            hyper = sh.calibrate_hyperparameter(curve, lam, cfg.calibration.endpoint)
            print(f"lambda={lam:g}: {cfg.calibration.param}={hyper:.4f}")
    return 0


COMMANDS = {
    "partition": cmd_partition,
    "test": cmd_test,
    "simulate": cmd_simulate,
    "rho": cmd_rho,
    "calibrate": cmd_calibrate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError, ArithmeticError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
