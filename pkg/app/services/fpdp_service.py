"""Fairness partial dependence: fix one feature for every applicant, re-predict, re-test.

The model is never retrained and risk classes stay at their baseline values,
so a curve isolates how the frozen scorer's fairness depends on one input.
"""

from collections.abc import Sequence
from typing import Literal

import numpy as np

from app.core.errors import FeatureError, InvalidParameterError
from app.core.logger import logger
from app.models.base import Classifier
from app.schemas.fairness import FairnessReport, HypothesisTag
from app.schemas.fpdp import CandidateVerdict, FpdpCurve, FpdpPoint, GridValue
from app.services.fairness_service import AuditSample, run_hypothesis
from app.services.model_service import classify, used_features

GridKind = Literal["observed", "uniform"]


def _test(model: Classifier, sample: AuditSample, tag: HypothesisTag, alpha: float, delta: float) -> FairnessReport:
    yhat = classify(model, sample.X, delta)
    return run_hypothesis(tag, yhat, sample.d, sample.y, sample.classes, alpha)


def fix_feature(sample: AuditSample, feature: str, value: GridValue) -> AuditSample:
    """Copy of the sample with ``feature`` set to ``value`` on every row; outcomes and classes untouched."""
    return AuditSample(sample.X.with_feature_value(feature, value), sample.y, sample.d, sample.classes)


def _check_sweepable(sample: AuditSample, feature: str) -> None:
    sample.X.columns_for(feature)
    if feature == sample.X.protected:
        raise FeatureError(f"{feature} is the protected attribute and cannot be swept")


def _sweep(
    model: Classifier,
    sample: AuditSample,
    feature: str,
    tag: HypothesisTag,
    alpha: float,
    values: Sequence[GridValue],
    kind: str,
    delta: float,
) -> FpdpCurve:
    baseline = _test(model, sample, tag, alpha, delta)
    points = []
    for value in values:
        report = _test(model, fix_feature(sample, feature, value), tag, alpha, delta)
        points.append(
            FpdpPoint(
                value=value,
                statistic=report.statistic,
                dof=report.dof,
                p_value=report.p_value,
                degenerate=report.degenerate,
            )
        )
    curve = FpdpCurve(
        feature=feature,
        hypothesis=tag,
        kind=kind,
        points=points,
        baseline_statistic=baseline.statistic,
        baseline_p_value=baseline.p_value,
        baseline_reject=baseline.reject,
        alpha=alpha,
    )
    logger.info(
        "fpdp_curve_computed",
        feature=feature,
        hypothesis=tag.value,
        points=len(points),
        witnesses=len(curve.witness_values()),
        baseline_p_value=baseline.p_value,
    )
    return curve


def fpdp_categorical(
    model: Classifier,
    sample: AuditSample,
    feature: str,
    hypothesis: HypothesisTag = HypothesisTag.SP,
    alpha: float = 0.10,
    delta: float = 0.5,
) -> FpdpCurve:
    """One point per level of a categorical feature, in declared level order."""
    _check_sweepable(sample, feature)
    if not sample.X.is_categorical(feature):
        raise FeatureError(f"{feature} is numeric; use the continuous sweep")
    levels = sample.X.levels[feature]
    return _sweep(model, sample, feature, HypothesisTag(hypothesis), alpha, list(levels), "categorical", delta)


def observed_grid(sample: AuditSample, feature: str) -> list[float]:
    column = sample.X.values[:, sample.X.columns_for(feature)[0]]
    return [float(value) for value in np.unique(column)]


def uniform_grid(sample: AuditSample, feature: str, points: int) -> list[float]:
    """``points`` evenly spaced values spanning the observed [min, max]."""
    if points < 2:
        raise InvalidParameterError(f"a uniform grid needs at least two points, got {points}")
    column = sample.X.values[:, sample.X.columns_for(feature)[0]]
    return [float(value) for value in np.linspace(column.min(), column.max(), points)]


def fpdp_continuous(
    model: Classifier,
    sample: AuditSample,
    feature: str,
    hypothesis: HypothesisTag = HypothesisTag.SP,
    alpha: float = 0.10,
    grid: Sequence[float] | None = None,
    delta: float = 0.5,
) -> FpdpCurve:
    """Sweep a numeric feature over ``grid`` (default: its sorted distinct observed values)."""
    _check_sweepable(sample, feature)
    if sample.X.is_categorical(feature):
        raise FeatureError(f"{feature} is categorical; use the categorical sweep")
    values = observed_grid(sample, feature) if grid is None else [float(value) for value in grid]
    if not values:
        raise InvalidParameterError(f"empty grid for {feature}")
    return _sweep(model, sample, feature, HypothesisTag(hypothesis), alpha, values, "numeric", delta)


def fpdp_curve(
    model: Classifier,
    sample: AuditSample,
    feature: str,
    hypothesis: HypothesisTag = HypothesisTag.SP,
    alpha: float = 0.10,
    delta: float = 0.5,
    grid: GridKind = "observed",
    grid_points: int = 50,
) -> FpdpCurve:
    _check_sweepable(sample, feature)
    if sample.X.is_categorical(feature):
        return fpdp_categorical(model, sample, feature, hypothesis, alpha, delta)
    values = uniform_grid(sample, feature, grid_points) if grid == "uniform" else None
    return fpdp_continuous(model, sample, feature, hypothesis, alpha, values, delta)


def sweep_features(
    model: Classifier,
    sample: AuditSample,
    hypothesis: HypothesisTag = HypothesisTag.SP,
    alpha: float = 0.10,
    features: Sequence[str] | None = None,
    delta: float = 0.5,
    grid: GridKind = "observed",
    grid_points: int = 50,
) -> list[FpdpCurve]:
    """Curves for ``features``, defaulting to the features the model actually uses."""
    if features is None:
        features = [name for name in used_features(model, sample.X) if name != sample.X.protected]
    return [fpdp_curve(model, sample, name, hypothesis, alpha, delta, grid, grid_points) for name in features]


def verdict(curve: FpdpCurve) -> CandidateVerdict:
    """A candidate has at least one swept value at which the hypothesis is no longer rejected."""
    return CandidateVerdict(
        feature=curve.feature,
        hypothesis=curve.hypothesis,
        witness_values=curve.witness_values(),
        informational=not curve.baseline_reject,
    )


def candidate_variables(
    model: Classifier,
    sample: AuditSample,
    hypothesis: HypothesisTag = HypothesisTag.SP,
    alpha: float = 0.10,
    features: Sequence[str] | None = None,
    delta: float = 0.5,
    grid: GridKind = "observed",
    grid_points: int = 50,
) -> list[CandidateVerdict]:
    curves = sweep_features(model, sample, hypothesis, alpha, features, delta, grid, grid_points)
    verdicts = [verdict(curve) for curve in curves]
    if curves and not curves[0].baseline_reject:
        logger.warning("fpdp_baseline_not_rejected", hypothesis=HypothesisTag(hypothesis).value, alpha=alpha)
    logger.info(
        "candidates_found",
        hypothesis=HypothesisTag(hypothesis).value,
        candidates=[item.feature for item in verdicts if item.is_candidate],
    )
    return verdicts
