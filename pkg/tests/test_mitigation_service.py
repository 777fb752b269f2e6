import numpy as np
import pytest
from conftest import stump

from app.core.errors import AuditError, FeatureError, InvalidParameterError
from app.schemas.fairness import HypothesisTag
from app.schemas.fpdp import CandidateVerdict
from app.schemas.mitigation import MitigationRow, Strategy
from app.schemas.models import TreeHyperparams
from app.services.clustering_service import kprototypes
from app.services.dataset_service import one_hot_encode
from app.services.fairness_service import AuditSample
from app.services.fpdp_service import fpdp_categorical
from app.services.mitigation_service import (
    baseline_row,
    equivalence_classes,
    four_fifths_ratio,
    mitigate_fix_value,
    mitigate_reestimate,
    panel_b_rows,
    prediction_digest,
    tradeoff_rows,
    tradeoff_table,
)
from app.services.model_service import classify, model_to_json, train_tree, used_features

DEPTH_ONE = TreeHyperparams(max_depth=1)


@pytest.fixture
def sample(synthetic):
    X = one_hot_encode(synthetic)
    return AuditSample(X, synthetic.target, synthetic.protected, kprototypes(synthetic, n_classes=2, seed=0))


@pytest.fixture
def model(sample):
    return train_tree(sample.X, sample.y, TreeHyperparams(max_depth=4, min_samples_leaf=8))


def make_row(label: str, auc: float, pcc: float, digest: str = "") -> MitigationRow:
    return MitigationRow(
        strategy=Strategy(kind="reestimate-drop", feature=label),
        p_values=dict.fromkeys((HypothesisTag.SP, HypothesisTag.CSP, HypothesisTag.EOP, HypothesisTag.EO), 0.5),
        predictive_equality=0.5,
        auc=auc,
        pcc=pcc,
        alpha=0.10,
        fair=True,
        prediction_digest=digest or label,
    )


def test_fix_value_matches_fpdp_point(model, sample):
    curve = fpdp_categorical(model, sample, "Housing", HypothesisTag.SP, alpha=0.10)
    for point in curve.points:
        row = mitigate_fix_value(model, sample, "Housing", point.value, alpha=0.10)
        assert row.p_values[HypothesisTag.SP] == point.p_value
        assert row.strategy.label == f"Housing (= {point.value})"


@pytest.mark.parametrize("value", [1e9, float("nan"), float("-inf")])
def test_fix_value_rejects_values_outside_observed_range(model, sample, value):
    with pytest.raises(FeatureError):
        mitigate_fix_value(model, sample, "Income", value)
    with pytest.raises(AuditError):
        mitigate_fix_value(model, sample, "Duration", value)


def test_fix_value_leaves_model_untouched(model, sample):
    before = model_to_json(model)
    mitigate_fix_value(model, sample, "Phone", "1")
    assert model_to_json(model) == before


def test_fixing_an_ignored_feature_changes_nothing(sample):
    model = stump(sample.X, "Income", 50.0)
    fixed = mitigate_fix_value(model, sample, "Housing", "rent")
    baseline = baseline_row(model, sample)

    assert fixed.prediction_digest == baseline.prediction_digest
    assert fixed.p_values == baseline.p_values
    assert fixed.auc == baseline.auc
    assert fixed.pcc == baseline.pcc


def test_reestimating_without_an_unused_feature(sample):
    model = train_tree(sample.X, sample.y, DEPTH_ONE)
    used = used_features(model, sample.X)
    unused = next(name for name in ("Duration", "Housing", "Phone", "Income") if name not in used)

    row = mitigate_reestimate("tree", sample, unused, hyperparams=DEPTH_ONE)

    assert row.strategy.label == unused
    assert row.prediction_digest == baseline_row(model, sample).prediction_digest


def test_reestimate_fair_flag(model, sample):
    row = mitigate_reestimate("tree", sample, "Phone", hyperparams=TreeHyperparams(max_depth=3))
    assert row.fair == all(p > row.alpha for p in row.p_values.values())

    strict = mitigate_reestimate(
        "tree", sample, "Phone", hyperparams=TreeHyperparams(max_depth=3), fair_includes_pe=True
    )
    assert strict.fair == (row.fair and row.predictive_equality > row.alpha)


def test_panel_b_has_one_row_per_witness_value(model, sample):
    verdicts = [
        CandidateVerdict(feature="Housing", hypothesis=HypothesisTag.SP, witness_values=["own", "free"]),
        CandidateVerdict(feature="Phone", hypothesis=HypothesisTag.SP, witness_values=[]),
        CandidateVerdict(feature="Income", hypothesis=HypothesisTag.SP, witness_values=[40.0]),
    ]
    rows = panel_b_rows(model, sample, verdicts)
    assert [row.strategy.label for row in rows] == ["Housing (= own)", "Housing (= free)", "Income (= 40.0)"]


def test_tradeoff_ordering():
    rows = [make_row("b", 0.80, 75.0), make_row("a", 0.83, 70.0), make_row("c", 0.82, 74.0)]
    report = tradeoff_table(rows, baseline=make_row("(none)", 0.84, 76.0))

    assert [row.strategy.label for row in report.rows] == ["a", "c", "b"]
    assert report.baseline_auc == 0.84
    assert report.equivalence_classes == []


def test_tradeoff_ties_fall_back_to_pcc_then_label():
    rows = [make_row("z", 0.8, 70.0), make_row("y", 0.8, 72.0), make_row("x", 0.8, 70.0)]
    assert [row.strategy.label for row in tradeoff_table(rows).rows] == ["y", "x", "z"]


def test_tradeoff_single_and_empty():
    only = make_row("only", 0.7, 65.0)
    assert tradeoff_table([only]).rows == [only]
    with pytest.raises(InvalidParameterError):
        tradeoff_table([])


def test_equivalence_classes():
    rows = [make_row("a", 0.8, 70.0, "same"), make_row("b", 0.7, 70.0, "other"), make_row("c", 0.6, 70.0, "same")]
    assert equivalence_classes(rows) == [["a", "c"]]
    assert tradeoff_table(rows).equivalence_classes == [["a", "c"]]


def test_tradeoff_rows():
    flat = tradeoff_rows(tradeoff_table([make_row("Telephone", 0.83251, 78.25)]))
    assert flat == [
        {
            "strategy": "Telephone",
            "SP": "0.5000",
            "CSP": "0.5000",
            "EOP": "0.5000",
            "EO": "0.5000",
            "PE": "0.5000",
            "AUC": "0.8325",
            "PCC": "78.2",
            "fair": "true",
            "four_fifths": "",
        }
    ]


def test_four_fifths_ratio():
    assert four_fifths_ratio([1, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(0.5)
    assert four_fifths_ratio([1, 1], [1, 1]) is None
    assert four_fifths_ratio([1, 0], [1, 0]) is None


def test_prediction_digest(model, sample):
    yhat = classify(model, sample.X)
    assert prediction_digest(yhat) == prediction_digest(yhat.astype(np.int64))
    assert prediction_digest(yhat) != prediction_digest(1 - yhat)
