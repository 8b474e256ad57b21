"""O-values of scoring metrics against a pool of DBT reference curves.

Two kinds of queries are supported: the area under a curve (and its
normalized form), and the y-value of a curve at a fixed x (for example
precision at recall 0.8). Reference values are computed for the whole pool
in one vectorized pass, sorted, and cached on the pool, so repeated queries
cost a binary search. The o-value is the fraction of pool curves whose value
is strictly below the observed one.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .confusion import Predictions
from .dbt import DbtPool
from .metrics import CurveKind, PerformanceCurve, curve_from_scores, ideal_auc, lift_area, recall

_POOL_CACHE: "weakref.WeakKeyDictionary[DbtPool, dict]" = weakref.WeakKeyDictionary()


@dataclass(frozen=True)
class ScoringOpsConfig:
    pool: DbtPool

    def __post_init__(self):
        if len(self.pool) < 1:
            raise ValueError("scoring config needs a non-empty pool")


@dataclass(frozen=True)
class OprcPoint:
    recall: float
    nominal_precision: float
    o_value: float


def _cache(pool: DbtPool) -> dict:
    try:
        return _POOL_CACHE[pool]
    except KeyError:
        return _POOL_CACHE.setdefault(pool, {})


def _check_pi(pi: float) -> float:
    pi = float(pi)
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must lie in (0, 1), got {pi}")
    return pi


def pool_aucs(pool: DbtPool, kind: CurveKind, pi: float) -> np.ndarray:
    """AUC of every pool curve, in pool order."""
    pi = _check_pi(pi)
    key = ("auc", kind, pi)
    cache = _cache(pool)
    if key not in cache:
        A, B = pool.curves
        x = kind.x(pi, A, B)
        if kind is CurveKind.LIFT:
            areas = lift_area(x, recall(pi, A, B))
        else:
            y = kind.y(pi, A, B)
            areas = np.sum(np.diff(x, axis=1) * (y[:, 1:] + y[:, :-1]) * 0.5, axis=1)
        areas.setflags(write=False)
        cache[key] = areas
    return cache[key]


def _sorted_aucs(pool: DbtPool, kind: CurveKind, pi: float) -> np.ndarray:
    key = ("auc-sorted", kind, float(pi))
    cache = _cache(pool)
    if key not in cache:
        vals = np.sort(pool_aucs(pool, kind, pi))
        vals.setflags(write=False)
        cache[key] = vals
    return cache[key]


def _fraction_below(sorted_vals: np.ndarray, value):
    out = np.searchsorted(sorted_vals, value, side="left") / sorted_vals.size
    return float(out) if np.ndim(out) == 0 else out


def ops_auc(kind: CurveKind, observed_auc, pi: float, cfg: ScoringOpsConfig):
    """Fraction of reference curves with AUC strictly below ``observed_auc``."""
    if not np.all(np.isfinite(observed_auc)):
        raise ValueError("observed_auc must be finite")
    return _fraction_below(_sorted_aucs(cfg.pool, kind, pi), observed_auc)


def ops_nauc(kind: CurveKind, observed_nauc, pi: float, cfg: ScoringOpsConfig):
    """O-value of a normalized AUC; NAUC is AUC rescaled by a positive constant given pi."""
    if np.any(np.asarray(observed_nauc) < 0):
        raise ValueError("observed_nauc must be non-negative")
    return ops_auc(kind, np.asarray(observed_nauc) * ideal_auc(kind, pi), pi, cfg)


def interpolate_errors(curve: PerformanceCurve, kind: CurveKind, u: float) -> tuple[float, float]:
    """(alpha, beta) at x-coordinate ``u`` by linear interpolation along the curve.

    The right neighbour is the first point (in threshold order) with x >= u,
    and the left neighbour is the point before it. When a point sits exactly
    at ``u`` its own errors are returned.
    """
    x = kind.x(curve.pi, curve.alphas, curve.betas)
    if not x[0] <= u <= x[-1]:
        raise ValueError(f"u={u} lies outside the curve's x-range [{x[0]}, {x[-1]}]")
    r = int(np.searchsorted(x, u, side="left"))
    if x[r] == u:
        return float(curve.alphas[r]), float(curve.betas[r])
    l = r - 1
    w = (u - x[l]) / (x[r] - x[l])
    a = curve.alphas[l] + (curve.alphas[r] - curve.alphas[l]) * w
    b = curve.betas[l] + (curve.betas[r] - curve.betas[l]) * w
    return float(a), float(b)


def pool_values_at(pool: DbtPool, kind: CurveKind, u: float, pi: float) -> np.ndarray:
    """y-value of every pool curve at x = ``u``, in pool order."""
    pi = _check_pi(pi)
    u = float(u)
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    if kind is CurveKind.LIFT and u <= 0.0:
        raise ValueError("lift is undefined at x = 0; query a positive x")
    key = ("point", kind, pi, u)
    cache = _cache(pool)
    if key not in cache:
        A, B = pool.curves
        x = kind.x(pi, A, B)
        rows = np.arange(len(pool))
        r = np.count_nonzero(x < u, axis=1)
        exact = x[rows, r] == u
        l = np.maximum(r - 1, 0)
        xl, xr = x[rows, l], x[rows, r]
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(exact, 0.0, (u - xl) / np.where(exact, 1.0, xr - xl))
        al, ar = A[rows, l], A[rows, r]
        bl, br = B[rows, l], B[rows, r]
        a_hat = np.where(exact, ar, al + (ar - al) * w)
        b_hat = np.where(exact, br, bl + (br - bl) * w)
        vals = np.asarray(kind.y(pi, a_hat, b_hat), dtype=float)
        vals.setflags(write=False)
        cache[key] = vals
    return cache[key]


def _sorted_values_at(pool: DbtPool, kind: CurveKind, u: float, pi: float) -> np.ndarray:
    key = ("point-sorted", kind, float(pi), float(u))
    cache = _cache(pool)
    if key not in cache:
        vals = np.sort(pool_values_at(pool, kind, u, pi))
        vals.setflags(write=False)
        cache[key] = vals
    return cache[key]


def ops_point(kind: CurveKind, u: float, v, pi: float, cfg: ScoringOpsConfig):
    """Fraction of reference curves whose y-value at x = ``u`` is strictly below ``v``."""
    return _fraction_below(_sorted_values_at(cfg.pool, kind, u, pi), v)


def nominal_at(curve: PerformanceCurve, kind: CurveKind, u: float) -> float:
    """Observed y-value at x = ``u``, read off ``curve`` with the pool's interpolation."""
    if kind is CurveKind.LIFT and u <= 0.0:
        raise ValueError("lift is undefined at x = 0; query a positive x")
    a, b = interpolate_errors(curve, kind, u)
    return float(kind.y(curve.pi, a, b))


def oprc(preds: Predictions, recall_grid: Sequence[float], cfg: ScoringOpsConfig,
         pi: float | None = None) -> list[OprcPoint]:
    """Precision-recall curve with each nominal precision paired with its o-value.

    ``pi`` defaults to the prevalence of ``preds``.
    """
    curve = curve_from_scores(preds, CurveKind.PRC)
    if pi is not None:
        curve = PerformanceCurve(_check_pi(pi), curve.alphas, curve.betas, CurveKind.PRC)
    out = []
    for u in recall_grid:
        u = float(u)
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"recall grid values must lie in [0, 1], got {u}")
        v = nominal_at(curve, CurveKind.PRC, u)
        out.append(OprcPoint(u, v, ops_point(CurveKind.PRC, u, v, curve.pi, cfg)))
    return out
