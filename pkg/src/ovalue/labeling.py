"""O-values of labeling metrics.

The reference distribution draws Type-I and Type-II errors independently
from Unif[0, 1]. The o-value of a nominal value ``mu`` is the reference
probability that the metric falls strictly below ``mu``.

Both numeric routes evaluate the metric once per (metric, pi, config),
sort the values, and answer each query with a binary search. Counting is
order-independent, so results do not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .metrics import LabelingMetric

RNG_ID = "numpy.PCG64"


@dataclass(frozen=True)
class LabelingOpsConfig:
    grid_resolution: int = 2000
    mc_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.grid_resolution < 10:
            raise ValueError(f"grid_resolution must be >= 10, got {self.grid_resolution}")
        if self.mc_samples < 1:
            raise ValueError(f"mc_samples must be >= 1, got {self.mc_samples}")


def ops_f1_closed(mu: float, pi: float) -> float:
    """Exact o-value of an f1 score ``mu`` at prevalence ``pi``."""
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must lie in (0, 1), got {pi}")
    if mu <= 0.0:
        return 0.0
    if mu >= 1.0:
        return 1.0
    below_line = (1 + pi) * mu / (2 * pi * (2 - mu))
    if mu <= 2 * pi / (1 + pi):
        return below_line
    # the level line leaves the unit square through beta = 1; remove the overhang
    overhang = ((1 + pi) * mu - 2 * pi) ** 2 / (2 * pi * (1 - pi) * mu * (2 - mu))
    return below_line - overhang


# 4M-cell grids are 32 MB each once sorted
@lru_cache(maxsize=12)
def _grid_values(kind: LabelingMetric, pi: float, resolution: int) -> np.ndarray:
    centers = (np.arange(resolution) + 0.5) / resolution
    vals = np.asarray(kind(pi, centers[:, None], centers[None, :]), dtype=float).ravel()
    vals.sort()
    vals.setflags(write=False)
    return vals


@lru_cache(maxsize=8)
def uniform_draws(samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``samples`` iid (alpha, beta) pairs from one seeded stream."""
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.random((samples, 2))
    alpha = np.ascontiguousarray(draws[:, 0])
    beta = np.ascontiguousarray(draws[:, 1])
    alpha.setflags(write=False)
    beta.setflags(write=False)
    return alpha, beta


@lru_cache(maxsize=32)
def _mc_values(kind: LabelingMetric, pi: float, samples: int, seed: int) -> np.ndarray:
    alpha, beta = uniform_draws(samples, seed)
    vals = np.asarray(kind(pi, alpha, beta), dtype=float)
    vals.sort()
    vals.setflags(write=False)
    return vals


def _fraction_below(sorted_vals: np.ndarray, mu) -> float | np.ndarray:
    counts = np.searchsorted(sorted_vals, mu, side="left")
    out = counts / sorted_vals.size
    return float(out) if np.ndim(out) == 0 else out


def _check_pi(pi: float) -> float:
    pi = float(pi)
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must lie in (0, 1), got {pi}")
    return pi


def ops_labeling_grid(kind: LabelingMetric, mu, pi: float, cfg: LabelingOpsConfig | None = None):
    """Midpoint-rule o-value on a ``grid_resolution`` squared lattice.

    ``mu`` may be a scalar or an array of nominal values.
    """
    cfg = cfg or LabelingOpsConfig()
    vals = _grid_values(kind, _check_pi(pi), cfg.grid_resolution)
    return _fraction_below(vals, mu)


def ops_labeling_mc(kind: LabelingMetric, mu, pi: float, cfg: LabelingOpsConfig | None = None):
    """Monte Carlo o-value from ``mc_samples`` seeded uniform draws."""
    cfg = cfg or LabelingOpsConfig()
    vals = _mc_values(kind, _check_pi(pi), cfg.mc_samples, cfg.seed)
    return _fraction_below(vals, mu)


def ops_labeling(kind: LabelingMetric, mu: float, pi: float, cfg: LabelingOpsConfig | None = None,
                 method: str = "auto") -> tuple[float, str]:
    """O-value plus the name of the method used.

    ``auto`` picks the closed form for f1 and the grid otherwise.
    """
    if method == "auto":
        method = "closed" if kind is LabelingMetric.F1 else "grid"
    if method == "closed":
        if kind is not LabelingMetric.F1:
            raise ValueError(f"no closed form for {kind.value}")
        return ops_f1_closed(mu, pi), method
    if method == "grid":
        return ops_labeling_grid(kind, mu, pi, cfg), method
    if method == "mc":
        return ops_labeling_mc(kind, mu, pi, cfg), method
    raise ValueError(f"unknown method {method!r}")
