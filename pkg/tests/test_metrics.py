import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ovalue.confusion import Predictions, Rates, confusion_from_rates
from ovalue.metrics import (
    CurveKind,
    LabelingMetric,
    PerformanceCurve,
    auc,
    curve_auc,
    curve_from_scores,
    curve_points,
    eval_labeling,
    ideal_auc,
    ideal_curve,
    lift_area,
    nauc,
)


def test_f1_of_trivial_positive_classifier():
    assert eval_labeling(LabelingMetric.F1, Rates(1, 0.5, 1.0, 0.0)) == pytest.approx(0.6667, abs=1e-4)
    assert eval_labeling(LabelingMetric.F1, Rates(1, 0.1, 1.0, 0.0)) == pytest.approx(0.1818, abs=1e-4)


@pytest.mark.parametrize("pi", [0.05, 0.3, 0.9])
def test_mcc_perfect_and_constant(pi):
    assert eval_labeling(LabelingMetric.MCC, Rates(1, pi, 0.0, 0.0)) == 1.0
    assert eval_labeling(LabelingMetric.MCC, Rates(1, pi, 1.0, 1.0)) == -1.0
    # 0/0 conventions for constant classifiers
    assert eval_labeling(LabelingMetric.MCC, Rates(1, pi, 1.0, 0.0)) == 0.0
    assert eval_labeling(LabelingMetric.MCC, Rates(1, pi, 0.0, 1.0)) == 0.0


def test_precision_by_hand():
    assert eval_labeling(LabelingMetric.PRECISION, Rates(1, 0.3, 0.2, 0.4)) == pytest.approx(0.5625, abs=1e-15)


def test_precision_with_no_predicted_positives_is_one():
    assert eval_labeling(LabelingMetric.PRECISION, Rates(1, 0.3, 0.0, 1.0)) == 1.0


def _count_formulas(cm):
    tp, fp, fn, tn = cm.as_tuple()
    out = {
        LabelingMetric.RECALL: tp / (tp + fn),
        LabelingMetric.F1: 2 * tp / (2 * tp + fp + fn),
    }
    if tp + fp > 0:
        out[LabelingMetric.PRECISION] = tp / (tp + fp)
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den > 0:
        out[LabelingMetric.MCC] = (tp * tn - fp * fn) / math.sqrt(den)
    return out


unit = st.floats(0.0, 1.0)


@given(st.floats(0.01, 0.99), unit, unit)
def test_rate_rules_match_count_formulas(pi, alpha, beta):
    r = Rates(1000.0, pi, alpha, beta)
    cm = confusion_from_rates(r)
    for kind, expected in _count_formulas(cm).items():
        assert eval_labeling(kind, r) == pytest.approx(expected, abs=1e-12)


@given(st.floats(0.01, 0.99), unit, unit)
def test_recall_and_lift_identities(pi, alpha, beta):
    r = Rates(1, pi, alpha, beta)
    assert eval_labeling(LabelingMetric.RECALL, r) == 1.0 - beta
    x = pi * (1 - beta) + (1 - pi) * alpha
    if x > 0:
        lift_y = float(CurveKind.LIFT.y(pi, alpha, beta))
        assert lift_y == pytest.approx(eval_labeling(LabelingMetric.PRECISION, r) / pi, rel=1e-12)
        assert eval_labeling(LabelingMetric.LIFT, r) == pytest.approx(lift_y, rel=1e-12)


@given(st.floats(0.01, 0.99), unit, unit)
def test_codomains(pi, alpha, beta):
    r = Rates(1, pi, alpha, beta)
    for kind in LabelingMetric:
        lo, hi = kind.codomain(pi)
        assert lo <= eval_labeling(kind, r) <= hi * (1 + 1e-12)


def _curve(pi, pairs, kind=CurveKind.ROC):
    a, b = zip(*pairs)
    return PerformanceCurve(pi, np.array(a), np.array(b), kind)


def test_roc_points():
    c = _curve(0.4, [(0, 1), (0, 0.5), (1, 0)])
    assert curve_points(CurveKind.ROC, c) == [(0, 0), (0, 0.5), (1, 1)]


@pytest.mark.parametrize("pi", [0.1, 0.5, 0.8])
def test_anchor_points(pi):
    c = _curve(pi, [(0, 1), (0.3, 0.4), (1, 0)])
    assert curve_points(CurveKind.PRC, c)[0] == (0.0, 1.0)
    assert curve_points(CurveKind.GAIN, c)[-1] == pytest.approx((1.0, 1.0))
    # lift drops its x = 0 point
    assert curve_points(CurveKind.LIFT, c)[0][0] > 0


def test_curve_invariants_enforced():
    with pytest.raises(ValueError):
        _curve(0.5, [(0, 1), (0.5, 0.2), (0.4, 0.1), (1, 0)])
    with pytest.raises(ValueError):
        _curve(0.5, [(0, 1), (0.5, 0.2)])


@pytest.mark.parametrize(
    "points, expected",
    [
        ([(0, 0), (0, 1), (1, 1)], 1.0),
        ([(0, 0), (1, 1)], 0.5),
        ([(0, 1), (0.5, 0.5), (1, 1)], 0.75),
    ],
)
def test_auc(points, expected):
    assert auc(points) == pytest.approx(expected, abs=1e-15)


def test_auc_errors():
    with pytest.raises(ValueError):
        auc([(0.3, 1.0), (0.3, 0.2)])
    with pytest.raises(ValueError):
        auc([(0.5, 1.0), (0.1, 0.2)])


def test_ideal_auc():
    assert ideal_auc(CurveKind.GAIN, 0.5) == 0.75
    for pi in (0.01, 0.3, 0.99):
        assert ideal_auc(CurveKind.PRC, pi) == 1.0
        assert ideal_auc(CurveKind.ROC, pi) == 1.0
    assert ideal_auc(CurveKind.LIFT, 0.1) == pytest.approx(3.3026, abs=1e-4)


def test_nauc():
    assert nauc(0.75, CurveKind.GAIN, 0.5) == 1.0
    assert nauc(0.5, CurveKind.ROC, 0.2) == 0.5
    assert nauc(1.6513, CurveKind.LIFT, 0.1) == pytest.approx(0.5, abs=1e-4)


@pytest.mark.parametrize("pi", [0.05, 0.2, 0.5, 0.9])
@pytest.mark.parametrize("kind", [CurveKind.ROC, CurveKind.GAIN, CurveKind.PRC])
def test_ideal_curve_attains_ideal_auc(kind, pi):
    area = auc(curve_points(kind, ideal_curve(pi)))
    assert area == pytest.approx(ideal_auc(kind, pi), abs=1e-9)
    assert 1 - 1e-9 <= nauc(area, kind, pi) <= 1 + 1e-12


@pytest.mark.parametrize("pi", [0.1, 0.3])
def test_ideal_lift_auc_converges(pi):
    # ideal classifier traced at m thresholds along both legs of its ROC path
    errors = []
    for m in (10, 100, 1000, 10_000):
        t = np.linspace(0, 1, m + 1)
        alphas = np.r_[np.zeros(m + 1), t[1:]]
        betas = np.r_[1 - t, np.zeros(m)]
        area = auc(curve_points(CurveKind.LIFT, PerformanceCurve(pi, alphas, betas)))
        errors.append(ideal_auc(CurveKind.LIFT, pi) - area)
    assert all(e >= 0 for e in errors)
    assert errors == sorted(errors, reverse=True)
    # missing area is mostly the [0, pi/m] sliver of height 1/pi
    assert errors[-1] == pytest.approx(1e-4, rel=1e-3)


def test_curve_from_scores_by_hand():
    c = curve_from_scores(Predictions([1, 0, 1, 0], [0.9, 0.8, 0.6, 0.4]))
    assert c.pairs() == [(0, 1), (0, 0.5), (0.5, 0.5), (0.5, 0), (1, 0)]
    assert c.pi == 0.5
    assert auc(curve_points(CurveKind.ROC, c)) == 0.75


def test_curve_from_scores_perfect_and_constant():
    c = curve_from_scores(Predictions([0, 1, 0, 1, 1], [0.1, 0.9, 0.3, 0.7, 0.8]))
    assert (0.0, 0.0) in c.pairs()
    c = curve_from_scores(Predictions([0, 1, 0, 1], [0.5] * 4))
    assert c.pairs() == [(0, 1), (1, 0)]


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 20)), min_size=2, max_size=80))
def test_roc_auc_matches_pair_counting(rows):
    labels = np.array([r[0] for r in rows])
    if labels.min() == labels.max():
        return
    scores = np.array([r[1] for r in rows], dtype=float)
    pos, neg = scores[labels == 1], scores[labels == 0]
    # Mann-Whitney: P(pos > neg) + 0.5 P(tie)
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    expected = wins / (len(pos) * len(neg))
    c = curve_from_scores(Predictions(labels, scores))
    assert auc(curve_points(CurveKind.ROC, c)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("pi", [0.01, 0.1, 0.37, 0.9])
def test_lift_area_of_ideal_curve_is_exact(pi):
    assert curve_auc(CurveKind.LIFT, ideal_curve(pi)) == pytest.approx(1 - np.log(pi), rel=1e-14)


def test_lift_area_segment_by_hand():
    # recall 0.2 -> 0.6 while x goes 0.1 -> 0.3: recall = 2x, lift constant 2
    assert lift_area([0.1, 0.3], [0.2, 0.6]) == pytest.approx(0.4, abs=1e-15)
    # recall constant 1 from x = 0.5 to 1: integral of 1/x
    assert lift_area([0.5, 1.0], [1.0, 1.0]) == pytest.approx(np.log(2), abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=12),
       st.floats(0.02, 0.98))
def test_lift_area_never_exceeds_ideal(pairs, pi):
    a = np.sort([p[0] for p in pairs])
    b = np.sort([p[1] for p in pairs])[::-1]
    curve = PerformanceCurve(pi, np.r_[0.0, a, 1.0], np.r_[1.0, b, 0.0])
    area = curve_auc(CurveKind.LIFT, curve)
    assert area <= 1 - np.log(pi) + 1e-12


def test_lift_area_close_to_trapezoid_on_fine_curves():
    rng = np.random.default_rng(5)
    y = (rng.random(4000) < 0.3).astype(int)
    s = rng.normal(size=4000) + 1.2 * y
    curve = curve_from_scores(Predictions(y, s))
    exact = curve_auc(CurveKind.LIFT, curve)
    trap = auc(curve_points(CurveKind.LIFT, curve))
    assert exact == pytest.approx(trap, rel=2e-3)
