from pydantic import BaseModel, ConfigDict, Field, model_validator


class ChiSquareResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    statistic: float = Field(..., ge=0.0)
    dof: int = Field(..., ge=0)
    p_value: float = Field(..., ge=0.0, le=1.0)
    degenerate: bool = False


class Stratum(BaseModel):
    """One 2x2 table, ``counts[u][v]`` with u over (A=1, A=0) and v over (B=1, B=0)."""

    model_config = ConfigDict(frozen=True)

    label: str
    counts: tuple[tuple[int, int], tuple[int, int]]

    @model_validator(mode="after")
    def _check_counts(self) -> "Stratum":
        if any(cell < 0 for row in self.counts for cell in row):
            raise ValueError("counts must be non-negative")
        return self

    @property
    def row_totals(self) -> tuple[int, int]:
        return (sum(self.counts[0]), sum(self.counts[1]))

    @property
    def column_totals(self) -> tuple[int, int]:
        return (self.counts[0][0] + self.counts[1][0], self.counts[0][1] + self.counts[1][1])

    @property
    def total(self) -> int:
        return sum(self.row_totals)


class ContingencyTable(BaseModel):
    strata: list[Stratum]

    @property
    def n(self) -> int:
        return sum(stratum.total for stratum in self.strata)

    def stratum(self, label: str) -> Stratum:
        for stratum in self.strata:
            if stratum.label == label:
                return stratum
        raise KeyError(label)
