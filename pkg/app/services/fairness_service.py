"""Chi-squared tests of the five group-fairness hypotheses.

Every test builds a (stratified) 2x2 table of predicted label against the
protected attribute and sums the Pearson statistics of the non-degenerate
strata. Rejecting a hypothesis is a result, not an error.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np

from app.core.errors import DegenerateDataError, InvalidParameterError
from app.core.logger import logger
from app.models.base import Classifier
from app.schemas.fairness import AuditSuite, CspAdvisory, FairnessReport, HypothesisTag, StratumResult
from app.schemas.stats import ContingencyTable
from app.services.clustering_service import RiskClassAssignment
from app.services.dataset_service import EncodedMatrix
from app.services.model_service import classify
from app.services.stats_service import build_table, chi2_sf, pearson_chi2_stratum

Conditioning = Literal["none", "risk_classes", "outcome", "outcome_positive", "outcome_negative"]
RiskClasses = RiskClassAssignment | Sequence[Any] | np.ndarray


@dataclass(frozen=True)
class FairnessHypothesis:
    tag: HypothesisTag
    conditioning: Conditioning

    @property
    def needs_outcome(self) -> bool:
        return self.conditioning.startswith("outcome")


HYPOTHESES: dict[HypothesisTag, FairnessHypothesis] = {
    HypothesisTag.SP: FairnessHypothesis(HypothesisTag.SP, "none"),
    HypothesisTag.CSP: FairnessHypothesis(HypothesisTag.CSP, "risk_classes"),
    HypothesisTag.EO: FairnessHypothesis(HypothesisTag.EO, "outcome"),
    HypothesisTag.EOP: FairnessHypothesis(HypothesisTag.EOP, "outcome_positive"),
    HypothesisTag.PE: FairnessHypothesis(HypothesisTag.PE, "outcome_negative"),
}

AUDIT_ORDER = (HypothesisTag.SP, HypothesisTag.CSP, HypothesisTag.EO, HypothesisTag.EOP, HypothesisTag.PE)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")


def _report(
    tag: HypothesisTag, table: ContingencyTable, alpha: float, advisory: CspAdvisory | None = None
) -> FairnessReport:
    strata = []
    statistic, dof = 0.0, 0
    for stratum in table.strata:
        result = pearson_chi2_stratum(stratum)
        strata.append(
            StratumResult(
                label=stratum.label,
                counts=stratum.counts,
                statistic=result.statistic,
                dof=result.dof,
                p_value=result.p_value,
                degenerate=result.degenerate,
            )
        )
        if not result.degenerate:
            statistic += result.statistic
            dof += result.dof
    p_value = chi2_sf(statistic, dof) if dof > 0 else 1.0
    return FairnessReport(
        hypothesis=tag,
        strata=strata,
        statistic=statistic,
        dof=dof,
        p_value=p_value,
        alpha=alpha,
        reject=p_value < alpha,
        advisory=advisory,
    )


def _outcome(y: Any, n: int) -> np.ndarray:
    outcome = np.asarray(y)
    if outcome.shape != (n,):
        raise InvalidParameterError(f"length mismatch: {outcome.size} outcomes for {n} predictions")
    if not np.isin(outcome, (0, 1)).all():
        raise InvalidParameterError("outcomes must be binary")
    return outcome.astype(int)


def _restricted(yhat: Any, y: Any, d: Any, value: int) -> tuple[np.ndarray, np.ndarray]:
    predicted, protected = np.asarray(yhat), np.asarray(d)
    outcome = _outcome(y, predicted.size)
    if protected.shape != predicted.shape:
        raise InvalidParameterError(f"length mismatch: {predicted.size} vs {protected.size}")
    rows = outcome == value
    if not rows.any():
        raise DegenerateDataError(f"no rows with Y={value}")
    return predicted[rows], protected[rows]


def test_statistical_parity(yhat: Any, d: Any, alpha: float = 0.05) -> FairnessReport:
    """H0: predicted label independent of the protected attribute."""
    _check_alpha(alpha)
    return _report(HypothesisTag.SP, build_table(yhat, d), alpha)


def _class_labels(classes: RiskClasses, n: int) -> tuple[np.ndarray, dict[str, str]]:
    if isinstance(classes, RiskClassAssignment):
        labels = classes.labels
        sizes = classes.sizes()
        empty = [k + 1 for k, size in enumerate(sizes) if size == 0]
        if empty:
            raise DegenerateDataError(f"risk classes {empty} are empty")
        names = {str(k): f"Class {k + 1}" for k in range(classes.n_classes)}
    else:
        labels = np.asarray(classes)
        names = {}
    if labels.shape != (n,):
        raise InvalidParameterError(f"length mismatch: {labels.size} class labels for {n} predictions")
    return labels, names


def test_conditional_parity(yhat: Any, d: Any, classes: RiskClasses, alpha: float = 0.05) -> FairnessReport:
    """H0: predicted label independent of the protected attribute within every risk class.

    The global statistic is the sum over classes; the advisory block carries the
    "at least one class" and "majority of classes" readings.
    """
    _check_alpha(alpha)
    predicted = np.asarray(yhat)
    labels, names = _class_labels(classes, predicted.size)
    table = build_table(predicted, d, labels)
    if names:
        table = ContingencyTable(
            strata=[stratum.model_copy(update={"label": names[stratum.label]}) for stratum in table.strata]
        )

    report = _report(HypothesisTag.CSP, table, alpha)
    tested = [stratum for stratum in report.strata if not stratum.degenerate]
    rejected = sum(stratum.p_value < alpha for stratum in tested)
    advisory = CspAdvisory(
        classes_rejected=rejected,
        classes_tested=len(tested),
        any_class_rejected=rejected > 0,
        majority_rejected=rejected > len(tested) / 2,
    )
    return report.model_copy(update={"advisory": advisory})


def test_equal_odds(yhat: Any, y: Any, d: Any, alpha: float = 0.05) -> FairnessReport:
    """H0: predicted label independent of the protected attribute given the true outcome."""
    _check_alpha(alpha)
    predicted = np.asarray(yhat)
    outcome = _outcome(y, predicted.size)
    missing = [value for value in (0, 1) if not (outcome == value).any()]
    if missing:
        raise DegenerateDataError(f"no rows with Y={missing[0]}")
    strata = np.where(outcome == 1, "Y=1", "Y=0")
    return _report(HypothesisTag.EO, build_table(predicted, d, strata), alpha)


def test_equal_opportunity(yhat: Any, y: Any, d: Any, alpha: float = 0.05) -> FairnessReport:
    """H0: equal true positive rates, tested on the Y=1 rows."""
    _check_alpha(alpha)
    predicted, protected = _restricted(yhat, y, d, 1)
    return _report(HypothesisTag.EOP, build_table(predicted, protected, np.full(predicted.size, "Y=1")), alpha)


def test_predictive_equality(yhat: Any, y: Any, d: Any, alpha: float = 0.05) -> FairnessReport:
    """H0: equal false positive rates, tested on the Y=0 rows."""
    _check_alpha(alpha)
    predicted, protected = _restricted(yhat, y, d, 0)
    return _report(HypothesisTag.PE, build_table(predicted, protected, np.full(predicted.size, "Y=0")), alpha)


def run_hypothesis(
    tag: HypothesisTag | str,
    yhat: Any,
    d: Any,
    y: Any | None = None,
    classes: RiskClasses | None = None,
    alpha: float = 0.05,
) -> FairnessReport:
    """Run one hypothesis by tag; the single entry point shared by audits, sweeps and mitigation."""
    hypothesis = HYPOTHESES[HypothesisTag(tag)]
    if hypothesis.needs_outcome and y is None:
        raise InvalidParameterError(f"{hypothesis.tag} needs the true outcome")
    if hypothesis.conditioning == "risk_classes" and classes is None:
        raise InvalidParameterError("conditional parity needs risk classes")

    match hypothesis.tag:
        case HypothesisTag.SP:
            return test_statistical_parity(yhat, d, alpha)
        case HypothesisTag.CSP:
            return test_conditional_parity(yhat, d, classes, alpha)  # type: ignore[arg-type]
        case HypothesisTag.EO:
            return test_equal_odds(yhat, y, d, alpha)
        case HypothesisTag.EOP:
            return test_equal_opportunity(yhat, y, d, alpha)
        case _:
            return test_predictive_equality(yhat, y, d, alpha)


@dataclass(frozen=True, eq=False)
class AuditSample:
    """Encoded rows with their true outcomes, protected attribute and frozen risk classes."""

    X: EncodedMatrix
    y: np.ndarray
    d: np.ndarray
    classes: RiskClasses | None = None

    def __post_init__(self) -> None:
        for name in ("y", "d"):
            values = np.asarray(getattr(self, name))
            if values.shape != (self.X.n,):
                raise InvalidParameterError(f"{name} has {values.size} entries for {self.X.n} rows")
            object.__setattr__(self, name, values.astype(int))


def audit_predictions(
    yhat: Any,
    y: Any,
    d: Any,
    classes: RiskClasses | None,
    delta: float = 0.5,
    alpha: float = 0.05,
    tags: Sequence[HypothesisTag] = AUDIT_ORDER,
) -> AuditSuite:
    predicted = np.asarray(yhat)
    reports = {tag: run_hypothesis(tag, predicted, d, y, classes, alpha) for tag in tags}
    return AuditSuite(reports=reports, delta=delta, alpha=alpha, accepted=int(predicted.sum()), n=int(predicted.size))


def audit(
    model: Classifier,
    X: EncodedMatrix,
    y: Any,
    d: Any,
    classes: RiskClasses,
    delta: float = 0.5,
    alpha: float = 0.05,
) -> AuditSuite:
    """Predict once at threshold ``delta`` and run all five tests."""
    yhat = classify(model, X, delta)
    suite = audit_predictions(yhat, y, d, classes, delta, alpha)
    logger.info(
        "audit_completed",
        preset=model.preset,
        accepted=suite.accepted,
        rejected=[tag.value for tag, report in suite.reports.items() if report.reject],
        p_values={tag.value: report.p_value for tag, report in suite.reports.items()},
    )
    return suite


def audit_sample(model: Classifier, sample: AuditSample, delta: float = 0.5, alpha: float = 0.05) -> AuditSuite:
    if sample.classes is None:
        raise InvalidParameterError("an audit needs risk classes for conditional parity")
    return audit(model, sample.X, sample.y, sample.d, sample.classes, delta, alpha)


def format_p_value(p_value: float, alpha: float) -> str:
    """Four decimals, starred when the hypothesis is rejected."""
    return f"{p_value:.4f}{'*' if p_value < alpha else ''}"


def table_rows(suite: AuditSuite) -> list[dict[str, str]]:
    """The audit in its tabular layout: SP, each CSP class, CSP global, EO, EOP, PE."""
    return [{"test": row.label, "p_value": format_p_value(row.p_value, suite.alpha)} for row in suite.rows()]
