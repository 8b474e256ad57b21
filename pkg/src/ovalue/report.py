"""Data ingestion, evaluation requests and "nominal (o-value)" reports."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .confusion import Predictions, confusion_at_threshold, rates_from_confusion
from .dbt import DEFAULT_DEPTH, DEFAULT_SAMPLES, DEFAULT_SEED, DbtPool, get_pool
from .labeling import RNG_ID, LabelingOpsConfig, ops_f1_closed, ops_labeling
from .metrics import CurveKind, LabelingMetric, curve_auc, curve_from_scores, ideal_auc
from .scoring import ScoringOpsConfig, nominal_at, ops_auc, ops_nauc, ops_point, oprc

FORMATS = ("json", "csv", "table")


class DataValidationError(ValueError):
    """Input data failed validation; the message names the offending row."""


def _sniff_delimiter(header: str) -> str:
    if "\t" in header:
        return "\t"
    return ","


def load_predictions(path: str | os.PathLike, delimiter: str | None = None) -> Predictions:
    """Read a delimited file with ``label`` and ``score`` columns.

    Rows are numbered from 1 starting at the first data row. The delimiter
    is comma or tab, detected from the header unless given.
    """
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DataValidationError(f"{path}: empty file")
    delimiter = delimiter or _sniff_delimiter(lines[0])
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = [h.strip().lower() for h in next(reader)]
    missing = [c for c in ("label", "score") if c not in header]
    if missing:
        raise DataValidationError(f"{path}: missing required column(s): {', '.join(missing)}")
    li, si = header.index("label"), header.index("score")
    labels, scores = [], []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        line = f"row {row_no} (line {row_no + 1})"
        if len(row) <= max(li, si):
            raise DataValidationError(f"{path}: {line}: expected {len(header)} fields, got {len(row)}")
        raw_label, raw_score = row[li].strip(), row[si].strip()
        try:
            label = float(raw_label)
        except ValueError:
            label = math.nan
        if label not in (0.0, 1.0):
            raise DataValidationError(f"{path}: {line}: label must be 0 or 1, got {raw_label!r}")
        try:
            score = float(raw_score)
        except ValueError:
            raise DataValidationError(f"{path}: {line}: unparseable score {raw_score!r}") from None
        if not math.isfinite(score):
            raise DataValidationError(f"{path}: {line}: score must be finite, got {raw_score!r}")
        labels.append(int(label))
        scores.append(score)
    if not labels:
        raise DataValidationError(f"{path}: no data rows")
    return Predictions(np.array(labels, dtype=np.int8), np.array(scores))


@dataclass(frozen=True)
class MetricSpec:
    """One requested metric, e.g. ``f1``, ``auc:prc``, ``nauc:lift`` or ``point:prc@0.9``."""

    family: str
    labeling: LabelingMetric | None = None
    curve: CurveKind | None = None
    u: float | None = None

    @property
    def name(self) -> str:
        if self.family == "labeling":
            return self.labeling.value
        if self.family == "point":
            return f"point:{self.curve.value}@{self.u:g}"
        return f"{self.family}:{self.curve.value}"

    @property
    def needs_pool(self) -> bool:
        return self.family != "labeling"


def parse_metrics(text: str | Iterable[str]) -> list[MetricSpec]:
    items = text.split(",") if isinstance(text, str) else list(text)
    out: list[MetricSpec] = []
    for raw in items:
        item = raw.strip().lower()
        if not item:
            continue
        family, _, rest = item.partition(":")
        if not rest:
            out.append(MetricSpec("labeling", labeling=LabelingMetric.parse(family)))
        elif family in ("auc", "nauc"):
            kinds = list(CurveKind) if rest == "*" else [CurveKind.parse(rest)]
            out.extend(MetricSpec(family, curve=k) for k in kinds)
        elif family == "point":
            kind, at, u = rest.partition("@")
            if not at:
                raise ValueError(f"point metric needs an x-position, e.g. point:prc@0.9 (got {raw!r})")
            u = float(u)
            if not 0.0 <= u <= 1.0:
                raise ValueError(f"point x-position must lie in [0, 1], got {u}")
            out.append(MetricSpec("point", curve=CurveKind.parse(kind), u=u))
        else:
            raise ValueError(f"unknown metric {raw!r}")
    if not out:
        raise ValueError("at least one metric must be selected")
    return out


@dataclass(frozen=True)
class EvaluationRequest:
    path: str | os.PathLike | None = None
    name: str | None = None
    metrics: tuple[str, ...] = ("f1", "mcc", "auc:prc", "point:prc@0.9")
    threshold: float = 0.5
    pi_override: float | None = None
    depth: int = DEFAULT_DEPTH
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    grid: int = 2000
    delimiter: str | None = None
    pool_cache: str | os.PathLike | None = None
    predictions: Predictions | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.path is None and self.predictions is None:
            raise ValueError("request needs an input path or predictions")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.pi_override is not None and not 0.0 < self.pi_override < 1.0:
            raise ValueError(f"pi override must lie in (0, 1), got {self.pi_override}")
        parse_metrics(self.metrics)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return Path(self.path).stem if self.path is not None else "testset"

    def load(self) -> Predictions:
        if self.predictions is not None:
            return self.predictions
        return load_predictions(self.path, self.delimiter)

    def pool_key(self) -> tuple:
        return (self.depth, self.samples, self.seed)


@dataclass(frozen=True)
class MetricResult:
    metric: str
    nominal: float
    o_value: float
    method: str

    def cell(self, digits: int = 2) -> str:
        return format_cell(self.nominal, self.o_value, digits)


@dataclass(frozen=True)
class EvaluatedSet:
    name: str
    n: int
    pi: float
    pi_source: str
    threshold: float
    pool_id: str | None
    metrics: tuple[MetricResult, ...]


@dataclass(frozen=True)
class OValueReport:
    tool_version: str
    rng_id: str
    seed: int
    depth: int
    samples: int
    grid: int
    testsets: tuple[EvaluatedSet, ...]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["testset", "n", "pi", "metric", "nominal", "o_value", "method"])
        for ts in self.testsets:
            for m in ts.metrics:
                w.writerow([ts.name, ts.n, repr(ts.pi), m.metric, repr(m.nominal), repr(m.o_value), m.method])
        return buf.getvalue()

    def to_table(self, digits: int = 2) -> str:
        metrics = [m.metric for m in self.testsets[0].metrics] if self.testsets else []
        rows = [["test set", "n", "pi", *metrics]]
        for ts in self.testsets:
            rows.append([ts.name, str(ts.n), f"{ts.pi:.{digits}f}", *(m.cell(digits) for m in ts.metrics)])
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
                 for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        footer = (f"entries are nominal (o-value); seed={self.seed} depth={self.depth} "
                  f"samples={self.samples} grid={self.grid} rng={self.rng_id}")
        return "\n".join(lines + ["", footer]) + "\n"

    def render(self, fmt: str = "json") -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        if fmt == "table":
            return self.to_table()
        raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def format_cell(nominal: float, o_value: float, digits: int = 2) -> str:
    """Render a result the way it is reported: ``"0.41 (0.89)"``."""
    return f"{nominal:.{digits}f} ({o_value:.{digits}f})"


def _evaluate_one(req: EvaluationRequest, pool: DbtPool | None) -> EvaluatedSet:
    preds = req.load()
    specs = parse_metrics(req.metrics)
    data_pi = preds.prevalence
    pi = req.pi_override if req.pi_override is not None else data_pi
    lab_cfg = LabelingOpsConfig(grid_resolution=req.grid, seed=req.seed)
    results = []
    cm = rates = curve = None
    for spec in specs:
        if spec.family == "labeling":
            if rates is None:
                cm = confusion_at_threshold(preds, req.threshold)
                rates = rates_from_confusion(cm)
            nominal = float(spec.labeling(pi, rates.alpha, rates.beta))
            o, method = ops_labeling(spec.labeling, nominal, pi, lab_cfg)
        else:
            if curve is None:
                curve = curve_from_scores(preds)
                if req.pi_override is not None:
                    curve = type(curve)(pi, curve.alphas, curve.betas, curve.kind)
            cfg = ScoringOpsConfig(pool)
            method = "dbt"
            if spec.family == "point":
                nominal = nominal_at(curve, spec.curve, spec.u)
                o = ops_point(spec.curve, spec.u, nominal, pi, cfg)
            else:
                area = curve_auc(spec.curve, curve)
                if spec.family == "auc":
                    nominal = area
                    o = ops_auc(spec.curve, area, pi, cfg)
                else:
                    nominal = area / ideal_auc(spec.curve, pi)
                    o = ops_nauc(spec.curve, nominal, pi, cfg)
        results.append(MetricResult(spec.name, float(nominal), float(o), method))
    return EvaluatedSet(
        name=req.label,
        n=len(preds),
        pi=float(pi),
        pi_source="override" if req.pi_override is not None else "data",
        threshold=req.threshold,
        pool_id=pool.identity if pool is not None else None,
        metrics=tuple(results),
    )


def _pool_for(requests: Sequence[EvaluationRequest]) -> DbtPool | None:
    if not any(s.needs_pool for r in requests for s in parse_metrics(r.metrics)):
        return None
    depth, samples, seed = requests[0].pool_key()
    return get_pool(depth, samples, seed, requests[0].pool_cache)


def _report(requests: Sequence[EvaluationRequest], rows: Sequence[EvaluatedSet]) -> OValueReport:
    first = requests[0]
    return OValueReport(
        tool_version=__version__,
        rng_id=RNG_ID,
        seed=first.seed,
        depth=first.depth,
        samples=first.samples,
        grid=first.grid,
        testsets=tuple(rows),
    )


def evaluate(req: EvaluationRequest, pool: DbtPool | None = None) -> OValueReport:
    """Nominal values and o-values of every requested metric on one test set."""
    pool = pool if pool is not None else _pool_for([req])
    return _report([req], [_evaluate_one(req, pool)])


def compare(requests: Sequence[EvaluationRequest]) -> OValueReport:
    """Evaluate several test sets against one shared reference pool and grid.

    Rows keep the input order.
    """
    requests = list(requests)
    if len(requests) < 2:
        raise ValueError("comparison needs at least two test sets")
    first = requests[0]
    for r in requests[1:]:
        if parse_metrics(r.metrics) != parse_metrics(first.metrics):
            raise ValueError("all test sets in a comparison must request the same metrics")
        if r.pool_key() != first.pool_key() or r.grid != first.grid:
            raise ValueError("all test sets in a comparison must share depth, samples, seed and grid")
    pool = _pool_for(requests)
    return _report(requests, [_evaluate_one(r, pool) for r in requests])


def emit_ops_curve(metric: str, pi_list: Sequence[float], mu_grid: Sequence[float],
                   pool: DbtPool | None = None, lab_cfg: LabelingOpsConfig | None = None,
                   method: str = "auto") -> list[dict]:
    """(pi, mu, o-value) records tracing the o-value as a function of the nominal value.

    ``metric`` uses the same syntax as report metrics. Curve metrics need a pool.
    """
    (spec,) = parse_metrics([metric])
    mu = np.asarray(mu_grid, dtype=float)
    records = []
    for pi in pi_list:
        pi = float(pi)
        if spec.family == "labeling":
            if method in ("auto", "closed") and spec.labeling is LabelingMetric.F1:
                ovals = np.array([ops_f1_closed(m, pi) for m in mu])
                used = "closed"
            else:
                used = "grid" if method == "auto" else method
                ovals = np.array([ops_labeling(spec.labeling, m, pi, lab_cfg, used)[0] for m in mu])
        else:
            if pool is None:
                raise ValueError(f"{spec.name} needs a DBT pool")
            cfg = ScoringOpsConfig(pool)
            used = "dbt"
            if spec.family == "auc":
                ovals = ops_auc(spec.curve, mu, pi, cfg)
            elif spec.family == "nauc":
                ovals = ops_nauc(spec.curve, mu, pi, cfg)
            else:
                ovals = ops_point(spec.curve, spec.u, mu, pi, cfg)
        for m, o in zip(mu.tolist(), np.atleast_1d(ovals).tolist()):
            records.append({"metric": spec.name, "pi": pi, "mu": m, "o_value": float(o), "method": used})
    return records


def emit_oprc(preds: Predictions, recall_grid: Sequence[float], pool: DbtPool,
              pi: float | None = None) -> list[dict]:
    """Side-by-side PRC and OPRC records: recall, nominal precision, o-value."""
    points = oprc(preds, recall_grid, ScoringOpsConfig(pool), pi=pi)
    return [{"recall": p.recall, "precision": p.nominal_precision, "o_value": p.o_value} for p in points]


def records_to_csv(records: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in columns])
    return buf.getvalue()


def records_to_table(records: Sequence[dict], columns: Sequence[str], digits: int = 4) -> str:
    rows = [list(columns)]
    for r in records:
        rows.append([f"{r[c]:.{digits}f}" if isinstance(r[c], float) else str(r[c]) for c in columns])
    widths = [max(len(row[i]) for row in rows) for i in range(len(columns))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
