from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

FeatureKind = Literal["categorical", "numeric"]
FeatureRole = Literal["feature", "target", "protected", "excluded"]


class FeatureSpec(BaseModel):
    """Declared type and role of one column."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1)
    kind: FeatureKind
    levels: tuple[str, ...] = Field(default=(), description="Ordered level codes of a categorical column")
    role: FeatureRole = "feature"

    @model_validator(mode="after")
    def _check_levels(self) -> "FeatureSpec":
        if self.kind == "categorical":
            if not self.levels:
                raise ValueError(f"categorical column {self.name} declares no levels")
            if any(not level for level in self.levels):
                raise ValueError(f"categorical column {self.name} has an empty level")
            if len(set(self.levels)) != len(self.levels):
                raise ValueError(f"categorical column {self.name} has duplicate levels")
        elif self.levels:
            raise ValueError(f"numeric column {self.name} cannot declare levels")
        return self


class DatasetSchema(BaseModel):
    """Sidecar schema of a CSV dataset, one entry per column."""

    columns: list[FeatureSpec]

    @model_validator(mode="after")
    def _check_roles(self) -> "DatasetSchema":
        names = [spec.name for spec in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        for role in ("target", "protected"):
            count = sum(spec.role == role for spec in self.columns)
            if count != 1:
                raise ValueError(f"exactly one column must have role {role}, found {count}")
        return self


class FeatureAssociation(BaseModel):
    feature: str
    v_target: float
    v_protected: float


class DatasetSummary(BaseModel):
    n: int
    protected_count: int
    unprotected_count: int
    default_count: int
    protected_default_count: int
    default_rate_protected: float = Field(..., description="Percentage of Y=0 within the protected group")
    default_rate_unprotected: float
    marginals: dict[str, dict[str, float]] = Field(default_factory=dict)
