from pydantic import BaseModel, Field


class ClassProfile(BaseModel):
    """Descriptive statistics of one risk class."""

    label: int
    size: int
    protected_share: float = Field(..., description="Fraction of the class in the protected group")
    default_rate: float = Field(..., description="Fraction of the class with Y=0")
    numeric_means: dict[str, float]
    categorical_modes: dict[str, str]


class ClusteringSummary(BaseModel):
    n_classes: int
    gamma: float
    seed: int
    n_iter: int
    objective: list[float]
    profiles: list[ClassProfile]
