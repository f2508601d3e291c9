"""Command line interface.

Exit codes: 0 success, 1 an inequality violation or residual breach, 2 bad
usage or input.
"""

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .bounds import EQUALITY_TOL, evaluate_all
from .campaign import CHECKS, compare_bounds, parse_checks, run_campaign
from .ensembles import KINDS, EnsembleSpec
from .extremal import ZeroOperatorError, find_extremal
from .linalg import read_matrix
from .operators import NonGenericError, spectrum_report
from .spectral import ConvergenceError

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

SPECTRUM_VALUE_TOL = 1e-9
SPECTRUM_VECTOR_TOL = 1e-10
EXTREMAL_RESIDUAL_TOL = 1e-8


class UsageError(Exception):
    pass


def _csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(args, text):
    if not args.quiet:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_verify(args):
    x = read_matrix(args.xfile)
    y = read_matrix(args.yfile)
    report = evaluate_all(x, y, tol=args.tol)
    if args.format == "json":
        text = report.to_json()
    else:
        rows = [
            [report.n, repr(report.lhs), e.name, int(e.applicable),
             "" if e.value is None else repr(e.value),
             "" if e.ratio is None else repr(e.ratio), int(e.equality), int(e.name == report.tightest)]
            for e in report.entries
        ]
        text = _csv(["n", "lhs", "name", "applicable", "value", "ratio", "equality", "tightest"], rows)
    _emit(args, text)
    return EXIT_VIOLATION if report.violations() else EXIT_OK


def cmd_spectrum(args):
    try:
        report = spectrum_report(args.values, perturb=args.perturb, seed=args.seed)
    except NonGenericError as exc:
        raise UsageError(f"{exc} (pass --perturb to nudge them)") from None
    top = float(np.max(report.lambda_diag ** 2))
    if args.format == "json":
        text = report.to_json()
    else:
        pred = sorted((e.value for e in report.predicted.entries), reverse=True)
        rows = [[k, repr(float(p)), repr(float(c))] for k, (p, c) in enumerate(zip(pred, report.computed))]
        text = _csv(["index", "predicted", "computed"], rows)
    _emit(args, text)
    breach = (
        report.value_error > SPECTRUM_VALUE_TOL * top
        or report.max_vector_residual > SPECTRUM_VECTOR_TOL * max(1.0, top)
    )
    return EXIT_VIOLATION if breach else EXIT_OK


def cmd_extremal(args):
    x = read_matrix(args.xfile)
    try:
        result = find_extremal(x, mode=args.mode)
    except ZeroOperatorError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        text = result.to_json()
    else:
        d = result.to_dict()
        d["y_star"] = json.dumps(d["y_star"])
        text = _csv(list(d), [[d[k] if isinstance(d[k], str) else repr(d[k]) for k in d]])
    _emit(args, text)
    ok = result.residual <= EXTREMAL_RESIDUAL_TOL * max(1.0, result.lambda_max)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_campaign(args):
    try:
        checks = parse_checks(args.checks)
        spec_x = EnsembleSpec(args.n, args.kind_x, args.count, args.seed, stream=0)
        spec_y = EnsembleSpec(args.n, args.kind_y, args.count, args.seed, stream=1)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    summary = run_campaign(
        spec_x, spec_y, checks, equality_tol=args.tol, workers=args.workers,
        keep_trials=args.trials is not None,
    )
    if args.format == "json":
        text = summary.to_json(include_timing=args.timing) + "\n"
    else:
        text = summary.to_csv(include_timing=args.timing)
    if args.out:
        Path(args.out).write_text(text)
    if args.trials:
        Path(args.trials).write_text(summary.trials_csv())
    _emit(args, text)
    return EXIT_OK if summary.passed else EXIT_VIOLATION


def cmd_compare(args):
    if args.count < 1 or args.n < 1:
        raise UsageError("n and count must be positive")
    rows = compare_bounds(args.n, args.count, args.seed, equality_tol=args.tol)
    if args.format == "json":
        text = json.dumps({"n": args.n, "count": args.count, "seed": args.seed, "rows": rows}, indent=2)
    else:
        header = list(rows[0])
        text = _csv(header, [[r[h] for h in header] for r in rows])
    _emit(args, text)
    return EXIT_OK


def _common(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--format", choices=("json", "csv"),
                        default=default if suppress else "json", help="output format")
    parser.add_argument("--tol", type=float, default=default if suppress else EQUALITY_TOL,
                        help="relative equality threshold")
    parser.add_argument("--quiet", action="store_true",
                        default=default if suppress else False, help="print nothing; exit code only")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="commbounds", description="Commutator norm bounds: verification and spectra."
    )
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    shared = argparse.ArgumentParser(add_help=False)
    _common(shared, suppress=True)

    p = sub.add_parser("verify", parents=[shared], help="evaluate every bound on one (X, Y) pair")
    p.add_argument("xfile")
    p.add_argument("yfile")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("spectrum", parents=[shared], help="closed-form vs numeric block spectrum")
    p.add_argument("values", nargs="+", type=float, metavar="LAMBDA")
    p.add_argument("--perturb", action="store_true", help="perturb non-generic input instead of failing")
    p.add_argument("--seed", type=int, default=0, help="seed for --perturb")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("extremal", parents=[shared], help="maximize ||[X, Y]|| over unit Y")
    p.add_argument("xfile")
    p.add_argument("--mode", choices=("auto", "dense", "matrix-free"), default="auto")
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("campaign", parents=[shared], help="Monte Carlo verification campaign")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kind-x", choices=KINDS, default="gaussian")
    p.add_argument("--kind-y", choices=KINDS, default="gaussian")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--checks", default="bw,kyfan", help=f"comma-separated subset of {','.join(CHECKS)}")
    p.add_argument("--out", help="also write the summary here")
    p.add_argument("--trials", help="write one CSV row per trial here")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="include runtime_ms in the summary")
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("compare", parents=[shared], help="bound win rates per X ensemble")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"commbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"commbounds: solver failure: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
