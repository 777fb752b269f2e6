from pydantic import BaseModel, Field, computed_field

from app.schemas.fairness import HypothesisTag

GridValue = str | float


class FpdpPoint(BaseModel):
    value: GridValue
    statistic: float
    dof: int
    p_value: float
    degenerate: bool


class FpdpCurve(BaseModel):
    feature: str
    hypothesis: HypothesisTag
    kind: str = Field(..., description="categorical or numeric")
    points: list[FpdpPoint]
    baseline_statistic: float
    baseline_p_value: float
    baseline_reject: bool
    alpha: float

    def witness_values(self) -> list[GridValue]:
        return [point.value for point in self.points if point.p_value > self.alpha]


class CandidateVerdict(BaseModel):
    feature: str
    hypothesis: HypothesisTag
    witness_values: list[GridValue]
    informational: bool = Field(False, description="Baseline test did not reject; verdict is indicative only")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def is_candidate(self) -> bool:
        return bool(self.witness_values)
