"""Outperformance standardization (o-values) for confusion-matrix-based metrics."""

__version__ = "0.1.0"

from .confusion import (  # noqa: E402
    ConfusionMatrix,
    DegeneratePrevalence,
    Predictions,
    Rates,
    confusion_at_threshold,
    confusion_from_labels,
    confusion_from_rates,
    rates_from_confusion,
)
from .dbt import DbtPool, DbtSample, build_pool, sample_dbt, sample_to_curve  # noqa: E402
from .labeling import LabelingOpsConfig, ops_f1_closed, ops_labeling_grid, ops_labeling_mc  # noqa: E402
from .metrics import (  # noqa: E402
    CurveKind,
    LabelingMetric,
    PerformanceCurve,
    auc,
    curve_auc,
    curve_from_scores,
    curve_points,
    eval_labeling,
    ideal_auc,
    nauc,
)
from .scoring import (  # noqa: E402
    OprcPoint,
    ScoringOpsConfig,
    interpolate_errors,
    ops_auc,
    ops_nauc,
    ops_point,
    oprc,
)
