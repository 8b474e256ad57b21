import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ovalue.labeling import (
    LabelingOpsConfig,
    ops_f1_closed,
    ops_labeling,
    ops_labeling_grid,
    ops_labeling_mc,
    uniform_draws,
)
from ovalue.metrics import LabelingMetric

F1 = LabelingMetric.F1


def test_f1_closed_endpoints():
    for pi in (0.05, 0.5, 0.95):
        assert ops_f1_closed(0.0, pi) == 0.0
        assert ops_f1_closed(1.0, pi) == pytest.approx(1.0, abs=1e-15)
        assert ops_f1_closed(-0.2, pi) == 0.0
        assert ops_f1_closed(1.3, pi) == 1.0


def test_f1_closed_values():
    assert ops_f1_closed(2 / 3, 0.5) == pytest.approx(0.75, abs=1e-12)
    # 0.6 is above the TPC level 2pi/(1+pi) at pi = 0.1 and below it at pi = 0.5
    assert ops_f1_closed(0.6, 0.1) == pytest.approx(181 / 189, abs=1e-12)
    assert ops_f1_closed(0.6, 0.5) == pytest.approx(9 / 14, abs=1e-12)
    assert round(ops_f1_closed(0.6, 0.1), 4) == 0.9577
    assert round(ops_f1_closed(0.6, 0.5), 4) == 0.6429


@pytest.mark.parametrize("pi", [0.05, 0.1, 0.37, 0.5, 0.9])
def test_f1_closed_branch_continuity(pi):
    knot = 2 * pi / (1 + pi)
    first = (1 + pi) * knot / (2 * pi * (2 - knot))
    second = first - ((1 + pi) * knot - 2 * pi) ** 2 / (2 * pi * (1 - pi) * knot * (2 - knot))
    assert abs(first - second) <= 1e-12
    assert ops_f1_closed(knot, pi) == pytest.approx(ops_f1_closed(math.nextafter(knot, 1), pi), abs=1e-12)


def _brute_f1_area(mu, pi, m=600):
    """Area of {f1 < mu} by integrating the level line's beta-section exactly per alpha column.

    For fixed alpha, f1 < mu  <=>  beta > (2 pi - mu (2 pi + (1 - pi) alpha)) / (pi (2 - mu)).
    """
    alphas = (np.arange(m) + 0.5) / m
    b_star = (2 * pi - mu * (2 * pi + (1 - pi) * alphas)) / (pi * (2 - mu))
    return float(np.mean(1 - np.clip(b_star, 0, 1)))


@pytest.mark.parametrize("pi", [0.1, 0.3, 0.5, 0.8])
@pytest.mark.parametrize("mu", [0.1, 0.4, 0.6, 0.9])
def test_f1_closed_against_section_integral(mu, pi):
    # section width is piecewise linear in alpha; midpoint error is tiny
    assert ops_f1_closed(mu, pi) == pytest.approx(_brute_f1_area(mu, pi, 20_000), abs=1e-6)


def test_grid_matches_closed_form():
    assert ops_labeling_grid(F1, 2 / 3, 0.5) == pytest.approx(0.75, abs=1e-3)


@pytest.mark.parametrize("pi", [0.1, 0.5, 0.9])
def test_grid_recall_is_uniform_cdf(pi):
    assert ops_labeling_grid(LabelingMetric.RECALL, 0.4, pi) == pytest.approx(0.4, abs=1e-3)


@pytest.mark.parametrize("pi", [0.1, 0.5])
def test_grid_codomain_bounds(pi):
    assert ops_labeling_grid(LabelingMetric.MCC, -1.0, pi) == 0.0
    assert ops_labeling_grid(LabelingMetric.MCC, 1.5, pi) == 1.0
    assert ops_labeling_grid(LabelingMetric.PRECISION, -0.1, pi) == 0.0


def test_grid_config_validation():
    with pytest.raises(ValueError):
        LabelingOpsConfig(grid_resolution=5)
    with pytest.raises(ValueError):
        LabelingOpsConfig(mc_samples=0)


def test_mc_within_binomial_band():
    cfg = LabelingOpsConfig(mc_samples=100_000, seed=3)
    se = math.sqrt(0.75 * 0.25 / cfg.mc_samples)
    assert abs(ops_labeling_mc(F1, 2 / 3, 0.5, cfg) - 0.75) <= 3 * se


@pytest.mark.parametrize("kind", list(LabelingMetric))
def test_mc_above_codomain_is_one(kind):
    cfg = LabelingOpsConfig(mc_samples=5000, seed=1)
    assert ops_labeling_mc(kind, kind.codomain(0.2)[1] + 1e-9, 0.2, cfg) == 1.0


def test_mc_deterministic_given_seed():
    a = ops_labeling_mc(LabelingMetric.MCC, 0.2, 0.3, LabelingOpsConfig(mc_samples=2000, seed=9))
    uniform_draws.cache_clear()
    b = ops_labeling_mc(LabelingMetric.MCC, 0.2, 0.3, LabelingOpsConfig(mc_samples=2000, seed=9))
    assert a == b
    c = ops_labeling_mc(LabelingMetric.MCC, 0.2, 0.3, LabelingOpsConfig(mc_samples=2000, seed=10))
    assert a != c


@pytest.mark.parametrize("pi", [0.1, 0.3, 0.5])
@pytest.mark.parametrize("v", [0.05, 0.2, 0.5, 0.77, 0.95])
def test_precision_lift_linear_invariance(v, pi):
    cfg = LabelingOpsConfig(mc_samples=50_000, seed=5)
    assert ops_labeling_mc(LabelingMetric.PRECISION, v, pi, cfg) == ops_labeling_mc(
        LabelingMetric.LIFT, v / pi, pi, cfg
    )


@pytest.mark.parametrize("a, b", [(2.0, 0.0), (0.5, 0.25), (1.0, -1.0)])
def test_recall_affine_invariance(a, b):
    # M2 = a * recall + b on shared draws; compare counts directly
    alpha, beta = uniform_draws(20_000, 4)
    m1 = LabelingMetric.RECALL(0.3, alpha, beta)
    m2 = a * m1 + b
    for mu in (0.1, 0.375, 0.5, 0.9):
        assert np.mean(m1 < mu) == np.mean(m2 < a * mu + b)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(list(LabelingMetric)), st.floats(0.05, 0.95), st.floats(-1, 1), st.floats(-1, 1))
def test_monotone_in_mu(kind, pi, m1, m2):
    lo, hi = sorted((m1, m2))
    cfg = LabelingOpsConfig(grid_resolution=200, mc_samples=2000, seed=0)
    assert ops_labeling_grid(kind, lo, pi, cfg) <= ops_labeling_grid(kind, hi, pi, cfg)
    assert ops_labeling_mc(kind, lo, pi, cfg) <= ops_labeling_mc(kind, hi, pi, cfg)


def test_vectorized_queries():
    mus = np.linspace(0, 1, 11)
    grid = ops_labeling_grid(F1, mus, 0.3)
    assert grid.shape == (11,)
    assert grid[5] == ops_labeling_grid(F1, 0.5, 0.3)


def test_ops_labeling_dispatch():
    assert ops_labeling(F1, 0.5, 0.2) == (ops_f1_closed(0.5, 0.2), "closed")
    assert ops_labeling(LabelingMetric.MCC, 0.1, 0.2)[1] == "grid"
    with pytest.raises(ValueError):
        ops_labeling(LabelingMetric.MCC, 0.1, 0.2, method="closed")
