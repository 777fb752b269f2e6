from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

MODEL_FORMAT_VERSION = 1

Criterion = Literal["gini", "entropy"]
FeaturesPerSplit = Literal["all", "sqrt", "log2"]


class TreeHyperparams(BaseModel):
    model_config = ConfigDict(frozen=True)

    criterion: Criterion = "gini"
    max_depth: int = Field(7, ge=1)
    min_samples_split: int = Field(2, ge=2)
    min_samples_leaf: int = Field(1, ge=1)
    max_features: FeaturesPerSplit = "all"
    min_impurity_decrease: float = Field(0.0, ge=0.0)


class LogisticHyperparams(BaseModel):
    model_config = ConfigDict(frozen=True)

    lam: float = Field(0.0, ge=0.0, description="L2 penalty on the mean negative log-likelihood")
    tol: float = Field(1e-8, gt=0.0)
    max_iter: int = Field(100, ge=1)


class HyperparamSpace(BaseModel):
    """Discrete range of every hyperparameter, sampled uniformly by random search."""

    name: str
    values: dict[str, list[Any]]

    @field_validator("values")
    @classmethod
    def _check_non_empty(cls, values: dict[str, list[Any]]) -> dict[str, list[Any]]:
        if not values:
            raise ValueError("a hyperparameter space needs at least one dimension")
        for key, options in values.items():
            if not options:
                raise ValueError(f"hyperparameter {key} has an empty range")
        return values

    @property
    def size(self) -> int:
        size = 1
        for options in self.values.values():
            size *= len(options)
        return size


class CvResult(BaseModel):
    params: dict[str, Any]
    fold_scores: list[float]
    mean_score: float


class SearchResult(BaseModel):
    space: str
    best_params: dict[str, Any]
    best_score: float
    table: list[CvResult]


class StandardizationParams(BaseModel):
    columns: list[int]
    means: list[float]
    stds: list[float]


class LogisticDocument(BaseModel):
    format_version: int = MODEL_FORMAT_VERSION
    kind: Literal["logistic"] = "logistic"
    preset: str | None = None
    feature_names: list[str]
    weights: list[float]
    intercept: float
    hyperparams: LogisticHyperparams
    standardization: StandardizationParams
    converged: bool
    n_iter: int


class TreeNodes(BaseModel):
    """Flat node arrays; ``feature == -1`` marks a leaf."""

    feature: list[int]
    threshold: list[float]
    left: list[int]
    right: list[int]
    value: list[float]
    n_samples: list[int]


class TreeDocument(BaseModel):
    format_version: int = MODEL_FORMAT_VERSION
    kind: Literal["tree"] = "tree"
    preset: str | None = None
    feature_names: list[str]
    hyperparams: TreeHyperparams
    seed: int
    nodes: TreeNodes


ModelDocument = Annotated[LogisticDocument | TreeDocument, Field(discriminator="kind")]


class ModelEnvelope(BaseModel):
    model: ModelDocument


class ModelMetrics(BaseModel):
    preset: str | None
    include_protected: bool
    n_features: int
    pcc: float
    auc: float
    used_features: list[str]
