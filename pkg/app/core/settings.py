import json
from pathlib import Path
from typing import Any, Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.errors import InvalidParameterError
from app.schemas.fairness import HypothesisTag

PresetName = Literal["lr", "ridge", "tree", "tree-prime"]


class RunConfig(BaseSettings):
    # Input data
    data_path: Path | None = Field(None, description="German credit file, or CSV when schema_path is set")
    schema_path: Path | None = Field(None, description="JSON sidecar schema for CSV ingestion")

    # Scoring model
    model_path: Path | None = Field(None, description="Saved model JSON; when absent the preset is trained")
    preset: PresetName = "tree-prime"
    include_protected: bool = Field(False, description="Train a with-model that sees the protected attribute")
    search_draws: int = Field(0, ge=0, description="Random-search draws; 0 trains the preset hyperparameters")
    folds: int = Field(10, ge=2)

    # Decision and test thresholds
    delta: float = 0.5
    alpha: float = 0.05
    fpdp_alpha: float = 0.10
    fair_includes_pe: bool = False

    # Risk classes for conditional statistical parity
    n_classes: int = Field(2, ge=2)
    gamma: float | None = Field(None, ge=0.0)
    clustering_max_iter: int = Field(100, ge=1)

    # Fairness partial dependence
    hypotheses: list[HypothesisTag] = Field(default_factory=lambda: [HypothesisTag.SP], min_length=1)
    features: list[str] | None = None
    grid: Literal["observed", "uniform"] = "observed"
    grid_points: int = Field(50, ge=2)

    seed: int = 0
    out_dir: Path = Path("out")
    log_level: str = "INFO"

    model_config = SettingsConfigDict(env_prefix="FAIRNESS_", env_file=".env", extra="ignore")

    @field_validator("delta")
    @classmethod
    def _check_delta(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        return value

    @field_validator("alpha", "fpdp_alpha")
    @classmethod
    def _check_alpha(cls, value: float) -> float:
        if not 0.0 < value < 0.5:
            raise ValueError("significance levels must lie in (0, 1/2)")
        return value


def load_config(config_path: Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Build the run configuration: flags > config file > environment > defaults."""
    values: dict[str, Any] = {}
    if config_path is not None:
        try:
            values.update(json.loads(Path(config_path).read_text()))
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidParameterError(f"cannot read config {config_path}: {e}") from e
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return RunConfig(**values)
    except ValueError as e:
        raise InvalidParameterError(str(e)) from e
