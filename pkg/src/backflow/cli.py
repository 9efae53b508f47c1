"""Command-line interface.

Subcommands: eig, sweep, classical, crossing, symmetry, validate, convert.
Tables go to ``--out`` (CSV by default, JSON with ``--format json``) and are
written atomically; without ``--out`` they are printed. Exit status is 0 on
success, 1 on a computation error (a JSON error record is written to
stderr) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .eigensolve import ConvergenceControl, converge_lambda_max, final_operator, largest_eigenpair
from .exceptions import BudgetExceededError, ConvergenceError, DomainError, TruncationError
from .kernel import PhysicalParams, dimensionless_cutoff
from .svg import line_chart
from .sweep import (
    DEFAULT_ALPHAS,
    classical_family,
    classical_step,
    find_half_crossing,
    sweep_lambda_max,
    symmetry_residuals,
)
from .validate import PositionGrid, extremal_state, transport_backflow

SIG_DIGITS = 9


class UsageError(Exception):
    pass


def fmt(x):
    """Format a number with 9 significant digits (blank for ``None``)."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def _round(x):
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(fmt(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _round(obj)


def to_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def to_json(meta, **payload):
    doc = {"meta": meta}
    doc.update(_jsonable(payload))
    return json.dumps(doc, indent=2) + "\n"


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _floats(text):
    try:
        values = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _positive(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _finite(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="backflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, tol):
        p.add_argument("--tol", type=_positive, default=tol,
                       help=f"target absolute tolerance on lambda_max (default {tol:g})")
        p.add_argument("--out", help="output file (printed to stdout if omitted)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        return p

    def svg(p):
        p.add_argument("--svg", nargs="?", const="", default=None, metavar="PATH",
                       help="also write an SVG chart (default: --out with .svg suffix)")

    p = common(sub.add_parser("eig", help="converged lambda_max at one cutoff"), 1e-4)
    p.add_argument("--u0", type=_finite, default=0.0)

    p = common(sub.add_parser("sweep", help="lambda_max over a range of cutoffs"), 1e-3)
    p.add_argument("--from", dest="lo", type=_finite, default=-4.0)
    p.add_argument("--to", dest="hi", type=_finite, default=4.0)
    p.add_argument("--step", type=_positive, default=0.1)
    svg(p)

    p = common(sub.add_parser("classical", help="the lambda_max(u0/alpha) family"), 1e-3)
    p.add_argument("--alphas", type=_floats, default=list(DEFAULT_ALPHAS))
    p.add_argument("--from", dest="lo", type=_finite, default=-2.0)
    p.add_argument("--to", dest="hi", type=_finite, default=2.0)
    p.add_argument("--step", type=_positive, default=0.1)
    svg(p)

    p = common(sub.add_parser("crossing", help="cutoff where lambda_max = 0.5"), 1e-3)
    p.add_argument("--bracket-lo", type=_finite, default=-2.0)
    p.add_argument("--bracket-hi", type=_finite, default=0.0)

    p = common(sub.add_parser("symmetry", help="odd-symmetry residuals about the crossing"), 1e-3)
    p.add_argument("--u0", type=_finite, default=None,
                   help="centre of symmetry (found by bisection if omitted)")
    p.add_argument("--offsets", type=_floats, default=[0.25, 0.5, 1.0])
    p.add_argument("--bracket-lo", type=_finite, default=-2.0)
    p.add_argument("--bracket-hi", type=_finite, default=0.0)

    p = common(sub.add_parser("validate", help="transport check of the extremal state"), 1e-4)
    p.add_argument("--u0", type=_finite, default=0.0)

    p = common(sub.add_parser("convert", help="physical parameters to the dimensionless cutoff"), 1e-4)
    p.add_argument("--p0", type=_finite, required=True)
    p.add_argument("--T", type=_finite, required=True)
    p.add_argument("--m", type=_finite, required=True)
    p.add_argument("--hbar", type=_finite, required=True)
    p.add_argument("--lambda", dest="with_lambda", action="store_true",
                   help="also converge lambda_max at the resulting u0")
    return parser


def grid_values(lo, hi, step):
    if not lo < hi:
        raise UsageError(f"--from ({lo}) must be below --to ({hi})")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [float(v) + 0.0 for v in np.round(lo + step * np.arange(count), 10)]


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "svg")}
    return cfg


def _meta(args):
    return {"version": __version__, "config": _jsonable(_config(args))}


def _cmd_eig(args, ctrl):
    est = converge_lambda_max(args.u0, ctrl)
    summary = (f"lambda_max = {fmt(est.lambda_max)} +- {est.error_estimate:.2e} "
               f"(u0={fmt(args.u0)}, n={est.n_final}, u_max={fmt(est.u_max_final)})")
    if args.format == "json":
        text = to_json(_meta(args), result=est.as_dict())
    else:
        text = to_csv(["n", "u_max", "lambda_max"], est.history)
    return text, summary, None


def _cmd_sweep(args, ctrl):
    result = sweep_lambda_max(grid_values(args.lo, args.hi, args.step), ctrl)
    rows = [(r.u0, r.lambda_max, r.error_estimate) for r in result.rows]
    failed = [r for r in result.rows if not r.ok]
    if args.format == "json":
        text = to_json(_meta(args), rows=[
            {"u0": r.u0, "lambda_max": r.lambda_max, "error_estimate": r.error_estimate,
             "error": r.error} for r in result.rows])
    else:
        text = to_csv(["u0", "lambda_max", "error_estimate"], rows)
    xs = [r.u0 for r in result.rows]
    chart = line_chart(
        [("lambda_max", xs, [r.lambda_max for r in result.rows]),
         ("classical", xs, [classical_step(x) for x in xs])],
        title="Maximum right-to-left probability flow")
    summary = f"{len(rows)} cutoffs, {len(failed)} failed"
    return text, summary, chart


def _cmd_classical(args, ctrl):
    for a in args.alphas:
        if not 0 < a <= 1:
            raise UsageError(f"alpha must lie in (0, 1], got {a}")
    u0s = grid_values(args.lo, args.hi, args.step)

    def evaluate(u):
        return converge_lambda_max(u, ctrl).lambda_max

    family = classical_family(evaluate, args.alphas, u0_values=u0s)
    rows = [(a, u, lam) for a in family.alpha_values for u, lam in family.curves[a]]
    if args.format == "json":
        text = to_json(_meta(args), rows=[
            {"alpha": a, "u0": u, "lambda_max": lam} for a, u, lam in rows])
    else:
        text = to_csv(["alpha", "u0", "lambda_max"], rows)
    series = [(f"alpha={fmt(a)}", u0s, [lam for _, lam in family.curves[a]])
              for a in family.alpha_values]
    series.append(("classical", u0s, [classical_step(x) for x in u0s]))
    chart = line_chart(series, title="Approach to the classical step")
    return text, f"{len(family.alpha_values)} curves x {len(u0s)} cutoffs", chart


def _cmd_crossing(args, ctrl):
    root = find_half_crossing(ctrl, (args.bracket_lo, args.bracket_hi))
    est = converge_lambda_max(root, ctrl)
    if args.format == "json":
        text = to_json(_meta(args), result={
            "u0_star": root, "lambda_max": est.lambda_max,
            "error_estimate": est.error_estimate})
    else:
        text = to_csv(["u0_star", "lambda_max", "error_estimate"],
                      [(root, est.lambda_max, est.error_estimate)])
    return text, f"u0* = {fmt(root)} (lambda_max = {fmt(est.lambda_max)})", None


def _cmd_symmetry(args, ctrl):
    centre = args.u0
    if centre is None:
        centre = find_half_crossing(ctrl, (args.bracket_lo, args.bracket_hi))
    report = symmetry_residuals(centre, args.offsets, ctrl)
    rows = []
    for s, r, e, x in zip(report.offsets, report.residuals, report.error_bars,
                          report.exceeds_error_bar):
        rows.append((s, report.u0_star + s, report.u0_star - s, r, e, x))
    header = ["offset", "u0_plus", "u0_minus", "residual", "error_bar", "exceeds_error_bar"]
    if args.format == "json":
        text = to_json(_meta(args), u0_star=report.u0_star, center=report.center,
                       rows=[dict(zip(header, row)) for row in rows])
    else:
        text = to_csv(header, rows)
    summary = (f"u0* = {fmt(report.u0_star)}, lambda_max(u0*) = {fmt(report.center)}; "
               f"{sum(report.exceeds_error_bar)} of {len(rows)} residuals exceed their error bars")
    return text, summary, None


def _cmd_validate(args, ctrl):
    est = converge_lambda_max(args.u0, ctrl)
    op = final_operator(est, ctrl)
    spectral = largest_eigenpair(op, dense_limit=ctrl.dense_limit)
    state = extremal_state(spectral, op.grid)
    # keep the position window inside one period of the grid synthesis
    half_width = min(200.0, 0.95 * math.pi / op.grid.spacing)
    result = transport_backflow(state, PositionGrid(half_width=half_width),
                                lambda_reference=spectral.lambda_max)
    record = result.as_dict()
    record.update(u0=args.u0, lambda_converged=est.lambda_max,
                  error_estimate=est.error_estimate)
    header = ["u0", "lambda_reference", "lambda_converged", "error_estimate", "backflow",
              "discrepancy", "p_left_initial", "p_left_final", "leak"]
    if args.format == "json":
        text = to_json(_meta(args), result=record)
    else:
        text = to_csv(header, [[record[h] for h in header]])
    summary = (f"transport backflow = {fmt(result.backflow)}, spectral = "
               f"{fmt(spectral.lambda_max)}, discrepancy = {result.discrepancy:.2e}")
    return text, summary, None


def _cmd_convert(args, ctrl):
    try:
        params = PhysicalParams(p0=args.p0, T=args.T, m=args.m, hbar=args.hbar)
    except DomainError as exc:
        raise UsageError(str(exc))
    u0 = dimensionless_cutoff(params)
    record = {"p0": args.p0, "T": args.T, "m": args.m, "hbar": args.hbar, "u0": u0}
    summary = f"u0 = {fmt(u0)}  (only T/(4 m hbar) matters; use any consistent units)"
    if args.with_lambda:
        est = converge_lambda_max(u0, ctrl)
        record.update(lambda_max=est.lambda_max, error_estimate=est.error_estimate)
        summary += f"\nlambda_max = {fmt(est.lambda_max)} +- {est.error_estimate:.2e}"
    if args.format == "json":
        text = to_json(_meta(args), result=record)
    else:
        text = to_csv(list(record), [list(record.values())])
    return text, summary, None


COMMANDS = {
    "eig": _cmd_eig,
    "sweep": _cmd_sweep,
    "classical": _cmd_classical,
    "crossing": _cmd_crossing,
    "symmetry": _cmd_symmetry,
    "validate": _cmd_validate,
    "convert": _cmd_convert,
}


def _check_writable(path):
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise UsageError(f"output directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise UsageError(f"output directory is not writable: {parent}")
    if Path(path).is_dir():
        raise UsageError(f"output path is a directory: {path}")


def run(argv=None):
    """Run the CLI and return the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        svg_path = getattr(args, "svg", None)
        if svg_path == "":
            if not args.out:
                raise UsageError("--svg without a path needs --out")
            svg_path = str(Path(args.out).with_suffix(".svg"))
        for path in (args.out, svg_path):
            if path:
                _check_writable(path)
        ctrl = ConvergenceControl(tol=args.tol)
        text, summary, chart = COMMANDS[args.subcommand](args, ctrl)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"backflow: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ConvergenceError, BudgetExceededError, TruncationError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("best_estimate", "error_estimate", "best_residual", "leak"):
            if hasattr(exc, attr):
                record[attr] = _round(getattr(exc, attr))
        print(json.dumps(record), file=sys.stderr)
        return 1

    if args.out:
        write_atomic(args.out, text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    if svg_path and chart is not None:
        write_atomic(svg_path, chart)
    return 0


def main():
    sys.exit(run())
