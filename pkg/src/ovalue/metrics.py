"""Labeling metrics and scoring curves in the (pi, alpha, beta) parametrization.

All rules accept scalars or numpy arrays for ``alpha`` and ``beta`` and
broadcast. Singular denominators follow fixed conventions instead of
producing NaN:

* precision with no predicted positives (alpha = 0, beta = 1) is 1;
* MCC with a zero denominator is 0;
* lift with no predicted positives is ``1 / pi`` (precision / pi).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .confusion import DegeneratePrevalence, Predictions, Rates


def _as_float(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def recall(pi, alpha, beta):
    return 1.0 - np.asarray(beta, dtype=float)


def predicted_positive_rate(pi, alpha, beta):
    """Fraction of instances predicted positive."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    return pi * (1.0 - beta) + (1.0 - pi) * alpha


def precision(pi, alpha, beta):
    tp = pi * (1.0 - np.asarray(beta, dtype=float))
    ppr = predicted_positive_rate(pi, alpha, beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(ppr > 0, tp / np.where(ppr > 0, ppr, 1.0), 1.0)
    return out


def f1(pi, alpha, beta):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    # denominator >= pi > 0 on the unit square
    return 2.0 * pi * (1.0 - beta) / (pi * (2.0 - beta) + (1.0 - pi) * alpha)


def mcc(pi, alpha, beta):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    odds = pi / (1.0 - pi)
    d1 = 1.0 - alpha + odds * beta
    d2 = 1.0 - beta + alpha / odds
    denom = d1 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denom > 0, (1.0 - alpha - beta) / np.sqrt(np.where(denom > 0, denom, 1.0)), 0.0)
    return np.clip(out, -1.0, 1.0)


def lift(pi, alpha, beta):
    return precision(pi, alpha, beta) / pi


class LabelingMetric(enum.Enum):
    RECALL = "recall"
    PRECISION = "precision"
    F1 = "f1"
    MCC = "mcc"
    LIFT = "lift"

    def __call__(self, pi, alpha, beta):
        return _LABELING_RULES[self](pi, alpha, beta)

    def codomain(self, pi: float) -> tuple[float, float]:
        if self is LabelingMetric.MCC:
            return (-1.0, 1.0)
        if self is LabelingMetric.LIFT:
            return (0.0, 1.0 / pi)
        return (0.0, 1.0)

    @classmethod
    def parse(cls, name: str) -> "LabelingMetric":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown labeling metric {name!r}") from None


_LABELING_RULES = {
    LabelingMetric.RECALL: recall,
    LabelingMetric.PRECISION: precision,
    LabelingMetric.F1: f1,
    LabelingMetric.MCC: mcc,
    LabelingMetric.LIFT: lift,
}


def eval_labeling(kind: LabelingMetric, r: Rates) -> float:
    return float(kind(r.pi, r.alpha, r.beta))


class CurveKind(enum.Enum):
    ROC = "roc"
    PRC = "prc"
    LIFT = "lift"
    GAIN = "gain"

    def x(self, pi, alpha, beta):
        if self is CurveKind.ROC:
            return np.asarray(alpha, dtype=float) + 0.0
        if self is CurveKind.PRC:
            return recall(pi, alpha, beta)
        return predicted_positive_rate(pi, alpha, beta)

    def y(self, pi, alpha, beta):
        if self is CurveKind.ROC or self is CurveKind.GAIN:
            return recall(pi, alpha, beta)
        if self is CurveKind.PRC:
            return precision(pi, alpha, beta)
        ppr = predicted_positive_rate(pi, alpha, beta)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(ppr > 0, recall(pi, alpha, beta) / np.where(ppr > 0, ppr, 1.0), np.nan)

    def ideal_auc(self, pi: float) -> float:
        return ideal_auc(self, pi)

    @classmethod
    def parse(cls, name: str) -> "CurveKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown curve kind {name!r}") from None


@dataclass(frozen=True, eq=False)
class PerformanceCurve:
    """Threshold-ordered (alpha, beta) pairs at a fixed prevalence.

    ``alphas`` is non-decreasing and ``betas`` non-increasing; the
    all-negative anchor (0, 1) comes first and the all-positive anchor
    (1, 0) last.
    """

    pi: float
    alphas: np.ndarray
    betas: np.ndarray
    kind: CurveKind = CurveKind.ROC

    def __post_init__(self):
        if not 0.0 < self.pi < 1.0:
            raise DegeneratePrevalence(f"prevalence must lie in (0, 1), got {self.pi}")
        a = np.asarray(self.alphas, dtype=float)
        b = np.asarray(self.betas, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or a.size < 2:
            raise ValueError("alphas and betas must be equal-length 1-D sequences of at least 2 points")
        if np.any(np.diff(a) < 0) or np.any(np.diff(b) > 0):
            raise ValueError("curve must have non-decreasing alpha and non-increasing beta")
        if (a[0], b[0]) != (0.0, 1.0) or (a[-1], b[-1]) != (1.0, 0.0):
            raise ValueError("curve must start at (alpha=0, beta=1) and end at (alpha=1, beta=0)")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", b)

    def __len__(self) -> int:
        return len(self.alphas)

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.alphas.tolist(), self.betas.tolist()))

    def with_kind(self, kind: CurveKind) -> "PerformanceCurve":
        return PerformanceCurve(self.pi, self.alphas, self.betas, kind)


def curve_points(kind: CurveKind, curve: PerformanceCurve) -> list[tuple[float, float]]:
    """(x, y) coordinates of ``curve`` under ``kind``, ordered by x.

    Ties in x keep the curve's threshold order. Lift points with x = 0 are
    dropped since lift is undefined there.
    """
    x = kind.x(curve.pi, curve.alphas, curve.betas)
    y = kind.y(curve.pi, curve.alphas, curve.betas)
    if kind is CurveKind.LIFT:
        keep = x > 0
        x, y = x[keep], y[keep]
    order = np.argsort(x, kind="stable")
    return list(zip(x[order].tolist(), y[order].tolist()))


def auc(points: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal area under a polyline given in x order.

    Consecutive points sharing an x form a vertical segment with no area.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if len(np.unique(x)) < 2:
        raise ValueError("auc needs at least two distinct x values")
    if np.any(np.diff(x) < 0):
        raise ValueError("points must be sorted by x ascending")
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) * 0.5))


def lift_area(x, rec):
    """Area under lift = recall / x along a polyline in (x, recall), exact per segment.

    Errors are interpolated linearly between thresholds, so recall is linear
    in x on each segment and the integral of recall / x has a closed form.
    Works on the last axis of 1-D or 2-D arrays. The leading x = 0 point
    (recall 0) contributes a finite first segment.
    """
    x = np.asarray(x, dtype=float)
    rec = np.asarray(rec, dtype=float)
    dx = np.diff(x, axis=-1)
    x0, x1 = x[..., :-1], x[..., 1:]
    live = (dx > 0) & (x0 > 0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        slope = np.where(dx > 0, np.diff(rec, axis=-1) / np.where(dx > 0, dx, 1.0), 0.0)
        icpt = rec[..., :-1] - slope * x0
        log_ratio = np.log(np.where(live, x1, 1.0)) - np.log(np.where(live, x0, 1.0))
        log_term = np.where(live, icpt * log_ratio, 0.0)
    return np.sum(slope * dx + log_term, axis=-1)


def curve_auc(kind: CurveKind, curve: PerformanceCurve) -> float:
    """Area under ``curve`` drawn as ``kind``.

    ROC, PRC and gain use the trapezoidal rule on :func:`curve_points`.
    Lift is integrated exactly between thresholds with :func:`lift_area`,
    since trapezoids overshoot the convex 1/x branch.
    """
    if kind is CurveKind.LIFT:
        x = kind.x(curve.pi, curve.alphas, curve.betas)
        return float(lift_area(x, recall(curve.pi, curve.alphas, curve.betas)))
    return auc(curve_points(kind, curve))


def ideal_auc(kind: CurveKind, pi: float) -> float:
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must lie in (0, 1), got {pi}")
    if kind is CurveKind.LIFT:
        return 1.0 - math.log(pi)
    if kind is CurveKind.GAIN:
        return 1.0 - pi / 2.0
    return 1.0


def nauc(auc_value: float, kind: CurveKind, pi: float) -> float:
    if auc_value < 0:
        raise ValueError(f"auc must be non-negative, got {auc_value}")
    return auc_value / ideal_auc(kind, pi)


def curve_from_scores(preds: Predictions, kind: CurveKind = CurveKind.ROC) -> PerformanceCurve:
    """Sweep every distinct score as a threshold, highest first.

    A sentinel threshold above the maximum score contributes the
    all-negative point, and the lowest score yields the all-positive one.
    """
    pi = preds.prevalence
    labels = preds.labels.astype(bool)
    order = np.argsort(-preds.scores, kind="stable")
    s = preds.scores[order]
    y = labels[order]
    # last index of each block of tied scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(y)[ends]
    fp = np.cumsum(~y)[ends]
    n_pos = labels.sum()
    n_neg = len(labels) - n_pos
    alphas = np.r_[0.0, fp / n_neg]
    betas = np.r_[1.0, (n_pos - tp) / n_pos]
    return PerformanceCurve(pi=pi, alphas=alphas, betas=betas, kind=kind)


def ideal_curve(pi: float, kind: CurveKind = CurveKind.ROC) -> PerformanceCurve:
    """Curve of the perfect classifier: (0, 1) -> (0, 0) -> (1, 0)."""
    return PerformanceCurve(pi, np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), kind)
