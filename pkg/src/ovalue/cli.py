"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data validation or I/O error,
3 degenerate prevalence (a test set without both classes).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .confusion import DegeneratePrevalence
from .dbt import DEFAULT_DEPTH, DEFAULT_SAMPLES, DEFAULT_SEED, get_pool
from .labeling import RNG_ID, LabelingOpsConfig
from .report import (
    FORMATS,
    DataValidationError,
    EvaluationRequest,
    compare,
    emit_oprc,
    emit_ops_curve,
    evaluate,
    load_predictions,
    records_to_csv,
    records_to_table,
)

log = logging.getLogger("ovalue")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> list[float]:
    """Parse ``"a,b,c"`` or ``"start:stop:count"`` (inclusive linspace)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid range must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise UsageError("grid count must be positive")
        return np.linspace(start, stop, count).tolist()
    return [float(v) for v in text.split(",") if v.strip()]


def _add_pool_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("reference pool")
    g.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="DBT depth (J = 2^(depth+1) - 1)")
    g.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="number of DBT samples G")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)
    g.add_argument("--grid", type=int, default=2000, help="cells per axis for labeling-metric grids")
    g.add_argument("--pool-cache", metavar="DIR", help="directory to read/write cached DBT pools")


def _add_output_flags(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--format", choices=FORMATS, default=default)
    p.add_argument("--output", "-o", metavar="PATH", help="write to PATH instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ovalue", description="O-values for classification performance metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("evaluate", help="nominal (o-value) report for one or more test sets")
    ev.add_argument("--input", action="append", default=[], metavar="PATH")
    ev.add_argument("--name", action="append", default=[], help="name for the matching --input")
    ev.add_argument("--compare", action="append", default=[], metavar="NAME=PATH",
                    help="add a named test set to a comparison (repeatable)")
    ev.add_argument("--metrics", default="f1,mcc,auc:prc,point:prc@0.9",
                    help="comma list of recall, precision, f1, mcc, lift, auc:<kind>, nauc:<kind>, "
                         "point:<kind>@<x>; kinds are roc, prc, lift, gain")
    ev.add_argument("--threshold", type=float, default=0.5, help="score threshold for labeling metrics")
    ev.add_argument("--pi-override", type=float, help="condition on this prevalence instead of the data's")
    ev.add_argument("--delimiter", choices=[",", "\t", "tab"], help="force the input delimiter")
    _add_pool_flags(ev)
    _add_output_flags(ev, "table")

    cv = sub.add_parser("curve", help="emit an o-value-versus-nominal-value series")
    cv.add_argument("--metric", required=True, help="f1, mcc, ..., auc:prc, point:prc@0.8")
    cv.add_argument("--pi", required=True, help="prevalences, e.g. 0.1,0.3,0.5")
    cv.add_argument("--mu-grid", default="0:1:101", help="nominal values, list or start:stop:count")
    cv.add_argument("--method", choices=["auto", "closed", "grid", "mc"], default="auto")
    cv.add_argument("--mc-samples", type=int, default=100_000)
    _add_pool_flags(cv)
    _add_output_flags(cv, "csv")

    op = sub.add_parser("oprc", help="emit PRC and OPRC series for a test set")
    op.add_argument("--input", required=True, metavar="PATH")
    op.add_argument("--recall-grid", default="0:1:21")
    op.add_argument("--pi-override", type=float)
    op.add_argument("--delimiter", choices=[",", "\t", "tab"])
    _add_pool_flags(op)
    _add_output_flags(op, "csv")
    return parser


def _delimiter(value):
    return "\t" if value == "tab" else value


def _requests(args) -> list[EvaluationRequest]:
    pairs: list[tuple[str | None, str]] = []
    if args.name and len(args.name) != len(args.input):
        raise UsageError("--name must be given once per --input")
    names = args.name or [None] * len(args.input)
    pairs.extend(zip(names, args.input))
    for item in args.compare:
        name, eq, path = item.partition("=")
        if not eq or not name or not path:
            raise UsageError(f"--compare expects NAME=PATH, got {item!r}")
        pairs.append((name, path))
    if not pairs:
        raise UsageError("no input given; use --input PATH or --compare NAME=PATH")
    common = dict(
        metrics=tuple(m for m in args.metrics.split(",") if m.strip()),
        threshold=args.threshold,
        pi_override=args.pi_override,
        depth=args.depth,
        samples=args.samples,
        seed=args.seed,
        grid=args.grid,
        delimiter=_delimiter(args.delimiter),
        pool_cache=args.pool_cache,
    )
    try:
        return [EvaluationRequest(path=path, name=name, **common) for name, path in pairs]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _render_records(records, columns, fmt, meta) -> str:
    if fmt == "json":
        return json.dumps({**meta, "records": records}, indent=2) + "\n"
    if fmt == "csv":
        return records_to_csv(records, columns)
    return records_to_table(records, columns)


def _meta(args) -> dict:
    return {"tool_version": __version__, "rng_id": RNG_ID, "seed": args.seed, "depth": args.depth,
            "samples": args.samples, "grid": args.grid}


def _run(args) -> str:
    if args.command == "evaluate":
        reqs = _requests(args)
        report = evaluate(reqs[0]) if len(reqs) == 1 else compare(reqs)
        return report.render(args.format)

    if args.command == "curve":
        pis = parse_grid(args.pi)
        if any(not 0.0 < p < 1.0 for p in pis):
            raise UsageError("prevalences must lie in (0, 1)")
        mu = parse_grid(args.mu_grid)
        needs_pool = ":" in args.metric
        pool = get_pool(args.depth, args.samples, args.seed, args.pool_cache) if needs_pool else None
        lab_cfg = LabelingOpsConfig(grid_resolution=args.grid, mc_samples=args.mc_samples, seed=args.seed)
        try:
            records = emit_ops_curve(args.metric, pis, mu, pool=pool, lab_cfg=lab_cfg, method=args.method)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return _render_records(records, ["metric", "pi", "mu", "o_value", "method"], args.format, _meta(args))

    if args.command == "oprc":
        preds = load_predictions(args.input, _delimiter(args.delimiter))
        pool = get_pool(args.depth, args.samples, args.seed, args.pool_cache)
        grid = parse_grid(args.recall_grid)
        if any(not 0.0 <= u <= 1.0 for u in grid):
            raise UsageError("recall grid values must lie in [0, 1]")
        pi = args.pi_override if args.pi_override is not None else preds.prevalence
        records = emit_oprc(preds, grid, pool, pi=pi)
        meta = {**_meta(args), "n": len(preds), "pi": pi}
        return _render_records(records, ["recall", "precision", "o_value"], args.format, meta)

    raise UsageError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        out = _run(args)
    except UsageError as exc:
        print(f"ovalue: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegeneratePrevalence as exc:
        print(f"ovalue: degenerate prevalence: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DataValidationError, OSError) as exc:
        print(f"ovalue: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"ovalue: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
