import numpy as np
import pytest
from conftest import constant_model, stump

from app.core.errors import FeatureError, InvalidParameterError
from app.schemas.fairness import HypothesisTag
from app.schemas.models import TreeHyperparams
from app.services import fairness_service as fairness
from app.services.clustering_service import kprototypes
from app.services.dataset_service import Dataset, one_hot_encode
from app.services.fairness_service import AuditSample
from app.services.fpdp_service import (
    candidate_variables,
    fpdp_categorical,
    fpdp_continuous,
    fpdp_curve,
    observed_grid,
    sweep_features,
    uniform_grid,
    verdict,
)
from app.services.model_service import classify, train_tree


@pytest.fixture
def audited(synthetic):
    X = one_hot_encode(synthetic)
    model = train_tree(X, synthetic.target, TreeHyperparams(max_depth=4, min_samples_leaf=8))
    assignment = kprototypes(synthetic, n_classes=2, seed=0)
    return model, AuditSample(X, synthetic.target, synthetic.protected, assignment)


def test_grid_point_equals_audit_on_modified_dataset(synthetic, audited):
    model, sample = audited
    for tag in (HypothesisTag.SP, HypothesisTag.CSP, HypothesisTag.EO):
        curve = fpdp_categorical(model, sample, "Housing", tag, alpha=0.10)

        assert [point.value for point in curve.points] == ["own", "rent", "free"]
        for point in curve.points:
            frame = synthetic.frame.copy()
            frame["Housing"] = point.value
            modified = one_hot_encode(Dataset(specs=synthetic.specs, frame=frame))
            yhat = classify(model, modified)
            report = fairness.run_hypothesis(tag, yhat, synthetic.protected, synthetic.target, sample.classes, 0.10)
            assert point.statistic == report.statistic
            assert point.p_value == report.p_value
            assert point.dof == report.dof


def test_continuous_sweep_uses_observed_values(synthetic, audited):
    model, sample = audited
    curve = fpdp_continuous(model, sample, "Duration", HypothesisTag.SP)

    values = [point.value for point in curve.points]
    assert values == sorted(set(synthetic.frame["Duration"].tolist()))
    assert curve.kind == "numeric"
    assert observed_grid(sample, "Duration") == values


def test_single_point_grid_matches_direct_test(synthetic, audited):
    model, sample = audited
    curve = fpdp_continuous(model, sample, "Income", HypothesisTag.SP, grid=[55.0])

    yhat = classify(model, sample.X.with_feature_value("Income", 55.0))
    report = fairness.test_statistical_parity(yhat, synthetic.protected, alpha=0.10)
    assert len(curve.points) == 1
    assert curve.points[0].statistic == report.statistic


def test_uniform_grid(audited):
    _, sample = audited
    grid = uniform_grid(sample, "Income", 5)
    column = sample.X.values[:, sample.X.columns_for("Income")[0]]

    assert len(grid) == 5
    assert grid[0] == column.min()
    assert grid[-1] == column.max()
    with pytest.raises(InvalidParameterError):
        uniform_grid(sample, "Income", 1)

    curve = fpdp_curve(audited[0], sample, "Income", grid="uniform", grid_points=5)
    assert [point.value for point in curve.points] == grid


def test_unused_feature_gives_flat_curve(audited):
    _, sample = audited
    model = stump(sample.X, "Income", 50.0)
    curve = fpdp_categorical(model, sample, "Housing", HypothesisTag.SP)

    assert all(point.statistic == curve.baseline_statistic for point in curve.points)
    assert all(point.p_value == curve.baseline_p_value for point in curve.points)


def test_constant_model_gives_degenerate_curve(audited):
    _, sample = audited
    curve = fpdp_continuous(constant_model(sample.X), sample, "Income", HypothesisTag.SP)

    assert all(point.degenerate and point.p_value == 1.0 for point in curve.points)
    assert not curve.baseline_reject
    assert verdict(curve).informational


def test_sweeps_are_pure(audited):
    model, sample = audited
    first = fpdp_categorical(model, sample, "Phone", HypothesisTag.EOP)
    second = fpdp_categorical(model, sample, "Phone", HypothesisTag.EOP)
    assert first.model_dump() == second.model_dump()


def test_verdict_follows_witness_values(audited):
    model, sample = audited
    for item in candidate_variables(model, sample, HypothesisTag.SP, alpha=0.10):
        assert item.is_candidate == bool(item.witness_values)


def test_candidate_witness_values_clear_alpha(audited):
    _, sample = audited
    # scores only through Phone: fixing Phone removes every difference between groups
    model = stump(sample.X, "Phone=1", 0.5)
    curves = sweep_features(model, sample, HypothesisTag.SP, alpha=0.10)

    assert [curve.feature for curve in curves] == ["Phone"]
    item = verdict(curves[0])
    assert curves[0].baseline_reject
    assert item.is_candidate
    assert set(item.witness_values) == {"0", "1"}


def test_sweep_errors(audited, synthetic):
    model, sample = audited
    with pytest.raises(FeatureError):
        fpdp_categorical(model, sample, "Wealth")
    with pytest.raises(FeatureError):
        fpdp_categorical(model, sample, "Income")
    with pytest.raises(FeatureError):
        fpdp_continuous(model, sample, "Housing")
    with pytest.raises(InvalidParameterError):
        fpdp_continuous(model, sample, "Income", grid=[])
    with pytest.raises(FeatureError, match="outside the observed range"):
        fpdp_continuous(model, sample, "Income", grid=[50.0, 1e9])
    with pytest.raises(FeatureError):
        fpdp_continuous(model, sample, "Income", grid=[float("nan")])

    X = one_hot_encode(synthetic, include_protected=True)
    with_protected = AuditSample(X, synthetic.target, synthetic.protected, sample.classes)
    with pytest.raises(FeatureError):
        fpdp_continuous(stump(X, "Income", 50.0), with_protected, "Sex")


def test_csp_sweep_keeps_classes_fixed(audited):
    model, sample = audited
    labels = sample.classes.labels.copy()
    curve = fpdp_categorical(model, sample, "Housing", HypothesisTag.CSP)

    fixed = sample.X.with_feature_value("Housing", "own")
    expected = fairness.test_conditional_parity(classify(model, fixed), sample.d, sample.classes, alpha=0.10)
    assert curve.points[0].statistic == expected.statistic
    assert np.array_equal(sample.classes.labels, labels)
