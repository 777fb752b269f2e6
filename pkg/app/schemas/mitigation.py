from typing import Literal

from pydantic import BaseModel, Field, computed_field

from app.schemas.fairness import HypothesisTag

PANEL_HYPOTHESES = (HypothesisTag.SP, HypothesisTag.CSP, HypothesisTag.EOP, HypothesisTag.EO)


class Strategy(BaseModel):
    kind: Literal["reestimate-drop", "fix-value"]
    feature: str
    value: str | float | None = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def label(self) -> str:
        if self.kind == "fix-value":
            return f"{self.feature} (= {self.value})"
        return self.feature


class MitigationRow(BaseModel):
    strategy: Strategy
    p_values: dict[HypothesisTag, float] = Field(..., description="SP, CSP (global), EOP and EO p-values")
    predictive_equality: float
    auc: float
    pcc: float
    alpha: float
    fair: bool
    prediction_digest: str
    four_fifths_ratio: float | None = Field(None, description="Protected over unprotected acceptance rate")


class TradeoffReport(BaseModel):
    rows: list[MitigationRow]
    equivalence_classes: list[list[str]]
    baseline_auc: float | None = None
    baseline_pcc: float | None = None
