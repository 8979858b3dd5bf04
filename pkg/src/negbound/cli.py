"""Command line entry point: ``negbound estimate|oracle|sweep|degrade``.

Exit codes: 0 success, 2 no feasible order, 3 input or schema error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import sys
import time

from . import io, spectral
from .errors import InputError, NoFeasibleOrder
from .moments import SpectralRange
from .pipeline import (
    PipelineConfig,
    SWEEP_HEADER,
    run_degradation,
    run_pipeline,
    run_sweep,
)
from .principal import Tolerances

EXIT_OK = 0
EXIT_NO_FEASIBLE_ORDER = 2
EXIT_INPUT_ERROR = 3

log = logging.getLogger("negbound")


def _add_pipeline_args(p, with_range=True):
    if with_range:
        p.add_argument("--range-a", type=float, default=None)
        p.add_argument("--range-b", type=float, default=None)
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--precheck", choices=("enforce", "warn", "skip"), default="warn")
    p.add_argument("--tol-det", type=float, default=Tolerances.det)
    p.add_argument("--tol-root", type=float, default=Tolerances.root)
    p.add_argument("--tol-residual", type=float, default=Tolerances.residual)


def _config(args, file_range=None, **kw):
    a = getattr(args, "range_a", None)
    b = getattr(args, "range_b", None)
    base = file_range or SpectralRange()
    rng = SpectralRange(base.a if a is None else a, base.b if b is None else b)
    tol = Tolerances(args.tol_det, args.tol_root, args.tol_residual)
    return PipelineConfig(range=rng, max_order=args.max_order, precheck_mode=args.precheck,
                          tolerances=tol, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="negbound",
        description="Bounds on the entanglement negativity from partial-transpose moments.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="bound the negativity from a moments file")
    est.add_argument("--input", required=True)
    est.add_argument("--output", default=None)
    est.add_argument("--format", choices=("json", "text"), default="json")
    _add_pipeline_args(est)

    orc = sub.add_parser("oracle", help="exact spectrum and moments of a state file")
    orc.add_argument("--state", required=True)
    orc.add_argument("--max-order", type=int, default=5)
    orc.add_argument("--output", default=None)

    sw = sub.add_parser("sweep", help="sandwich check over a random ensemble")
    sw.add_argument("--kind", required=True, choices=spectral.KINDS)
    sw.add_argument("--dims", type=int, nargs=2, metavar=("dA", "dB"), default=(2, 2))
    sw.add_argument("--count", type=int, default=100)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--out", default=None)
    _add_pipeline_args(sw)

    deg = sub.add_parser("degrade", help="pipeline under relative moment noise")
    deg.add_argument("--input", required=True)
    deg.add_argument("--sigma", type=float, required=True)
    deg.add_argument("--trials", type=int, default=100)
    deg.add_argument("--seed", type=int, default=0)
    deg.add_argument("--output", default=None)
    _add_pipeline_args(deg)
    return parser


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def format_text(report) -> str:
    lines = [f"range [{report.range.a}, {report.range.b}]"]
    for f in report.findings:
        lines.append(f"finding ({f.severity}) order {f.order}: {f.message}")
    for e in report.entries:
        if e.ok:
            b = e.bound
            lines.append(f"order {e.order}: {b.direction} {b.negativity:.10g} "
                         f"[{b.quality}, mu0 >= {b.mu0:.10g}]")
        else:
            lines.append(f"order {e.order}: failed ({'; '.join(e.errors)})")
        for w in e.warnings:
            lines.append(f"  warning: {w}")
    if report.exp_fit is not None:
        lines.append(f"exp-fit: lower {report.exp_fit.negativity:.10g}")
    if report.best_lower is not None:
        lines.append(f"best lower: {report.best_lower.negativity:.10g} "
                     f"(order {report.best_lower.order}, {report.best_lower.method})")
    if report.best_upper is not None:
        lines.append(f"best upper: {report.best_upper.negativity:.10g} "
                     f"(order {report.best_upper.order})")
    if report.bound_crossing:
        lines.append("bound_crossing: true")
    return "\n".join(lines) + "\n"


def cmd_estimate(args) -> int:
    seq, file_range = io.load_moments(args.input)
    config = _config(args, file_range, output_format=args.format)
    try:
        report = run_pipeline(seq, config)
        code = EXIT_OK
    except NoFeasibleOrder as exc:
        log.error("%s", exc)
        report, code = exc.report, EXIT_NO_FEASIBLE_ORDER
    if config.output_format == "text":
        _emit(format_text(report), args.output)
    else:
        _emit(io.dumps(report.to_dict()), args.output)
    return code


def cmd_oracle(args) -> int:
    rho = io.load_state(args.state)
    if args.max_order < 2:
        raise InputError("--max-order must be at least 2")
    doc = io.moments_document(spectral.pt_moments(rho, args.max_order))
    doc["spectrum"] = spectral.exact_spectrum_report(rho).to_dict()
    _emit(io.dumps(doc), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _config(args)
    start = time.perf_counter()
    rows = run_sweep(args.kind, args.dims[0], args.dims[1], args.count, args.seed, config)
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_HEADER, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v))
                         for k, v in row.items()})
    _emit(buf.getvalue(), args.out)
    passed = sum(bool(r["sandwich_ok"]) for r in rows)
    log.info("%d/%d sandwich ok in %.2fs", passed, len(rows), time.perf_counter() - start)
    return EXIT_OK


def cmd_degrade(args) -> int:
    seq, file_range = io.load_moments(args.input)
    config = _config(args, file_range)
    summary = run_degradation(seq, args.sigma, args.trials, args.seed, config)
    _emit(io.dumps(summary), args.output)
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "oracle": cmd_oracle,
            "sweep": cmd_sweep, "degrade": cmd_degrade}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
