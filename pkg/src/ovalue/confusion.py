"""Confusion matrices and the (n, pi, alpha, beta) rate parametrization."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DegeneratePrevalence(ValueError):
    """Raised when a test set lacks one of the two classes (pi is 0 or 1)."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts of a single thresholded evaluation.

    Cells are real-valued so that the conversion from rates is total;
    matrices built from data are always integral.
    """

    tp: float
    fp: float
    fn: float
    tn: float

    def __post_init__(self):
        cells = (self.tp, self.fp, self.fn, self.tn)
        if any(not math.isfinite(c) or c < 0 for c in cells):
            raise ValueError(f"confusion cells must be finite and non-negative, got {cells}")
        if sum(cells) <= 0:
            raise ValueError("confusion matrix total must be positive")

    @property
    def n(self) -> float:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def positives(self) -> float:
        return self.tp + self.fn

    @property
    def negatives(self) -> float:
        return self.fp + self.tn

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.tp, self.fp, self.fn, self.tn)


@dataclass(frozen=True)
class Rates:
    """Test size, prevalence, Type-I error and Type-II error."""

    n: float
    pi: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0.0 < self.pi < 1.0:
            raise DegeneratePrevalence(f"prevalence must lie in (0, 1), got {self.pi}")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True, eq=False)
class Predictions:
    """Binary labels paired with real-valued classifier scores."""

    labels: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        scores = np.asarray(self.scores, dtype=float)
        if labels.ndim != 1 or scores.ndim != 1:
            raise ValueError("labels and scores must be one-dimensional")
        if len(labels) != len(scores):
            raise ValueError(f"length mismatch: {len(labels)} labels vs {len(scores)} scores")
        if len(labels) == 0:
            raise ValueError("predictions must not be empty")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if not np.isfinite(scores).all():
            raise ValueError("scores must be finite")
        labels = labels.astype(np.int8)
        labels.setflags(write=False)
        scores.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_positive(self) -> int:
        return int(self.labels.sum())

    @property
    def prevalence(self) -> float:
        pos = self.n_positive
        if pos == 0 or pos == len(self):
            raise DegeneratePrevalence(
                f"test set has {pos} positives out of {len(self)}; both classes are required"
            )
        return pos / len(self)


def confusion_from_labels(labels: Sequence[int], predicted: Sequence[int]) -> ConfusionMatrix:
    y = np.asarray(labels)
    yhat = np.asarray(predicted)
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise ValueError("empty input")
    if not (np.isin(y, (0, 1)).all() and np.isin(yhat, (0, 1)).all()):
        raise ValueError("labels and predictions must be 0 or 1")
    y = y.astype(bool)
    yhat = yhat.astype(bool)
    return ConfusionMatrix(
        tp=int(np.sum(y & yhat)),
        fp=int(np.sum(~y & yhat)),
        fn=int(np.sum(y & ~yhat)),
        tn=int(np.sum(~y & ~yhat)),
    )


def confusion_at_threshold(preds: Predictions, t: float) -> ConfusionMatrix:
    """Confusion matrix when every score ``>= t`` is predicted positive."""
    predicted = (preds.scores >= t).astype(np.int8)
    return confusion_from_labels(preds.labels, predicted)


def rates_from_confusion(cm: ConfusionMatrix) -> Rates:
    pos, neg = cm.positives, cm.negatives
    if pos <= 0 or neg <= 0:
        raise DegeneratePrevalence(
            f"confusion matrix has {pos} positives and {neg} negatives; both classes are required"
        )
    n = cm.n
    return Rates(n=n, pi=pos / n, alpha=cm.fp / neg, beta=cm.fn / pos)


def _snap(x: float, scale: float) -> float:
    # products like n * (a / n) can land a few ulps off the integer a
    r = round(x)
    if abs(x - r) <= 64 * sys.float_info.epsilon * max(1.0, scale):
        return float(r)
    return x


def confusion_from_rates(r: Rates) -> ConfusionMatrix:
    """Inverse of :func:`rates_from_confusion`.

    Cells lying within floating-point noise of an integer are snapped to it,
    which makes the round trip exact for count-valued matrices.
    """
    pos = r.n * r.pi
    neg = r.n - pos
    fn = pos * r.beta
    fp = neg * r.alpha
    cells = (pos - fn, fp, fn, neg - fp)
    tp, fp, fn, tn = (max(0.0, _snap(c, r.n)) for c in cells)
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)
