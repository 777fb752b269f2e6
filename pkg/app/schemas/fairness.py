import sys
from enum import Enum

if sys.version_info >= (3, 11):
    from enum import StrEnum
else:  # pragma: no cover - Python 3.10 compatibility shim mirroring enum.StrEnum

    class StrEnum(str, Enum):
        def __str__(self) -> str:
            return str(self.value)

        def __format__(self, format_spec: str) -> str:
            return str(self.value).__format__(format_spec)

from pydantic import BaseModel, Field


class HypothesisTag(StrEnum):
    SP = "SP"
    CSP = "CSP"
    EO = "EO"
    EOP = "EOP"
    PE = "PE"


HYPOTHESIS_NAMES = {
    HypothesisTag.SP: "Statistical parity",
    HypothesisTag.CSP: "Cond. parity",
    HypothesisTag.EO: "Equal odds",
    HypothesisTag.EOP: "Equal opportunity",
    HypothesisTag.PE: "Predictive equality",
}


class StratumResult(BaseModel):
    label: str
    counts: tuple[tuple[int, int], tuple[int, int]]
    statistic: float
    dof: int
    p_value: float
    degenerate: bool


class CspAdvisory(BaseModel):
    """Economic aggregation rules, reported next to the summed test."""

    classes_rejected: int
    classes_tested: int
    any_class_rejected: bool
    majority_rejected: bool


class FairnessReport(BaseModel):
    hypothesis: HypothesisTag
    strata: list[StratumResult]
    statistic: float = Field(..., ge=0.0)
    dof: int = Field(..., ge=0)
    p_value: float = Field(..., ge=0.0, le=1.0)
    alpha: float
    reject: bool
    advisory: CspAdvisory | None = None

    @property
    def degenerate(self) -> bool:
        return self.dof == 0


class AuditRow(BaseModel):
    """One line of the Table-2-style layout."""

    label: str
    p_value: float
    reject: bool


class AuditSuite(BaseModel):
    reports: dict[HypothesisTag, FairnessReport]
    delta: float
    alpha: float
    accepted: int = Field(..., description="Number of applicants with predicted label 1")
    n: int

    def rows(self) -> list[AuditRow]:
        rows: list[AuditRow] = [self._row(HYPOTHESIS_NAMES[HypothesisTag.SP], self.reports[HypothesisTag.SP])]
        csp = self.reports[HypothesisTag.CSP]
        for index, stratum in enumerate(csp.strata, start=1):
            rows.append(
                AuditRow(
                    label=f"Cond. parity Class {index}",
                    p_value=stratum.p_value,
                    reject=stratum.p_value < self.alpha,
                )
            )
        rows.append(self._row("Cond. parity (global)", csp))
        for tag in (HypothesisTag.EO, HypothesisTag.EOP, HypothesisTag.PE):
            rows.append(self._row(HYPOTHESIS_NAMES[tag], self.reports[tag]))
        return rows

    @staticmethod
    def _row(label: str, report: FairnessReport) -> AuditRow:
        return AuditRow(label=label, p_value=report.p_value, reject=report.reject)
