"""Mitigation by fixing a candidate variable or by re-estimating without it, and the trade-off ranking."""

import hashlib
from collections.abc import Iterable, Sequence
from typing import Any

import numpy as np

from app.core.errors import InvalidParameterError
from app.core.logger import logger
from app.models.base import Classifier
from app.schemas.fairness import HypothesisTag
from app.schemas.fpdp import CandidateVerdict, GridValue
from app.schemas.mitigation import PANEL_HYPOTHESES, MitigationRow, Strategy, TradeoffReport
from app.schemas.models import LogisticHyperparams, TreeHyperparams
from app.services.fairness_service import AuditSample, run_hypothesis
from app.services.fpdp_service import fix_feature
from app.services.metrics_service import auc, pcc
from app.services.model_service import predict_proba, preset_hyperparams, train_with


def prediction_digest(yhat: np.ndarray) -> str:
    return hashlib.sha256(np.asarray(yhat, dtype=np.int8).tobytes()).hexdigest()


def four_fifths_ratio(yhat: Any, d: Any) -> float | None:
    """Acceptance rate of the protected group over that of the others; None when undefined."""
    predicted, protected = np.asarray(yhat), np.asarray(d)
    if not protected.any() or protected.all():
        return None
    unprotected_rate = float(predicted[protected == 0].mean())
    if unprotected_rate == 0.0:
        return None
    return float(predicted[protected == 1].mean()) / unprotected_rate


def evaluate(
    strategy: Strategy,
    scores: np.ndarray,
    sample: AuditSample,
    alpha: float = 0.10,
    delta: float = 0.5,
    fair_includes_pe: bool = False,
) -> MitigationRow:
    """Fairness p-values and performance of one scored sample."""
    yhat = (scores > delta).astype(int)
    reports = {
        tag: run_hypothesis(tag, yhat, sample.d, sample.y, sample.classes, alpha)
        for tag in (*PANEL_HYPOTHESES, HypothesisTag.PE)
    }
    p_values = {tag: reports[tag].p_value for tag in PANEL_HYPOTHESES}
    predictive_equality = reports[HypothesisTag.PE].p_value
    fair = all(p > alpha for p in p_values.values())
    if fair_includes_pe:
        fair = fair and predictive_equality > alpha
    return MitigationRow(
        strategy=strategy,
        p_values=p_values,
        predictive_equality=predictive_equality,
        auc=auc(sample.y, scores),
        pcc=pcc(sample.y, yhat),
        alpha=alpha,
        fair=fair,
        prediction_digest=prediction_digest(yhat),
        four_fifths_ratio=four_fifths_ratio(yhat, sample.d),
    )


def baseline_row(
    model: Classifier, sample: AuditSample, alpha: float = 0.10, delta: float = 0.5, fair_includes_pe: bool = False
) -> MitigationRow:
    strategy = Strategy(kind="reestimate-drop", feature="(none)")
    return evaluate(strategy, predict_proba(model, sample.X), sample, alpha, delta, fair_includes_pe)


def mitigate_fix_value(
    model: Classifier,
    sample: AuditSample,
    feature: str,
    value: GridValue,
    alpha: float = 0.10,
    delta: float = 0.5,
    fair_includes_pe: bool = False,
) -> MitigationRow:
    """Set ``feature`` to ``value`` for every applicant and re-score with the unchanged model."""
    fixed = fix_feature(sample, feature, value)
    row = evaluate(
        Strategy(kind="fix-value", feature=feature, value=value),
        predict_proba(model, fixed.X),
        fixed,
        alpha,
        delta,
        fair_includes_pe,
    )
    logger.info("mitigation_evaluated", strategy=row.strategy.label, fair=row.fair, auc=row.auc)
    return row


def mitigate_reestimate(
    preset: str,
    sample: AuditSample,
    feature: str,
    alpha: float = 0.10,
    seed: int = 0,
    delta: float = 0.5,
    hyperparams: LogisticHyperparams | TreeHyperparams | None = None,
    fair_includes_pe: bool = False,
) -> MitigationRow:
    """Drop every column of ``feature``, retrain with the frozen hyperparameters and re-audit.

    ``hyperparams`` overrides the preset when the baseline came out of a random search.
    """
    reduced = AuditSample(sample.X.without_feature(feature), sample.y, sample.d, sample.classes)
    model = train_with(hyperparams or preset_hyperparams(preset), reduced.X, reduced.y, seed=seed, preset=preset)
    row = evaluate(
        Strategy(kind="reestimate-drop", feature=feature),
        predict_proba(model, reduced.X),
        reduced,
        alpha,
        delta,
        fair_includes_pe,
    )
    logger.info("mitigation_evaluated", strategy=row.strategy.label, fair=row.fair, auc=row.auc)
    return row


def panel_a_rows(
    preset: str,
    sample: AuditSample,
    features: Iterable[str],
    alpha: float = 0.10,
    seed: int = 0,
    delta: float = 0.5,
    hyperparams: LogisticHyperparams | TreeHyperparams | None = None,
    fair_includes_pe: bool = False,
) -> list[MitigationRow]:
    return [
        mitigate_reestimate(preset, sample, feature, alpha, seed, delta, hyperparams, fair_includes_pe)
        for feature in features
    ]


def panel_b_rows(
    model: Classifier,
    sample: AuditSample,
    verdicts: Sequence[CandidateVerdict],
    alpha: float = 0.10,
    delta: float = 0.5,
    fair_includes_pe: bool = False,
) -> list[MitigationRow]:
    """One fix-value row per witness value of every candidate variable."""
    return [
        mitigate_fix_value(model, sample, item.feature, value, alpha, delta, fair_includes_pe)
        for item in verdicts
        for value in item.witness_values
    ]


def equivalence_classes(rows: Sequence[MitigationRow]) -> list[list[str]]:
    """Labels of rows producing identical prediction vectors, for every group of two or more."""
    groups: dict[str, list[str]] = {}
    for row in rows:
        groups.setdefault(row.prediction_digest, []).append(row.strategy.label)
    return [labels for labels in groups.values() if len(labels) > 1]


def tradeoff_table(rows: Sequence[MitigationRow], baseline: MitigationRow | None = None) -> TradeoffReport:
    """Rows by decreasing AUC, then decreasing PCC, then strategy label."""
    if not rows:
        raise InvalidParameterError("the trade-off table needs at least one row")
    ordered = sorted(rows, key=lambda row: (-row.auc, -row.pcc, row.strategy.label))
    return TradeoffReport(
        rows=ordered,
        equivalence_classes=equivalence_classes(ordered),
        baseline_auc=baseline.auc if baseline else None,
        baseline_pcc=baseline.pcc if baseline else None,
    )


def tradeoff_rows(report: TradeoffReport) -> list[dict[str, str]]:
    """Flat rows: strategy, the four panel p-values, AUC, PCC and the fair flag."""
    rows = []
    for row in report.rows:
        flat = {"strategy": row.strategy.label}
        flat.update({tag.value: f"{row.p_values[tag]:.4f}" for tag in PANEL_HYPOTHESES})
        flat.update(
            {
                "PE": f"{row.predictive_equality:.4f}",
                "AUC": f"{row.auc:.4f}",
                "PCC": f"{row.pcc:.1f}",
                "fair": str(row.fair).lower(),
                "four_fifths": "" if row.four_fifths_ratio is None else f"{row.four_fifths_ratio:.4f}",
            }
        )
        rows.append(flat)
    return rows
