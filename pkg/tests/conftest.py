import os
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from app.models.tree import LEAF, TreeModel
from app.schemas.dataset import FeatureSpec
from app.schemas.models import TreeHyperparams
from app.services.dataset_service import Dataset, EncodedMatrix, german_credit_specs, load_german_credit

DATA_DIR = Path(__file__).parent / "data"

GERMAN_NUMERIC_RANGES = {
    "CreditDuration": (4, 72),
    "CreditAmount": (250, 18424),
    "InstallmentRate": (1, 4),
    "ResidenceTime": (1, 4),
    "Age": (19, 75),
    "NumberOfCredit": (1, 4),
    "NumberLiablePeople": (1, 2),
}


def synthetic_specs() -> tuple[FeatureSpec, ...]:
    return (
        FeatureSpec(name="Income", kind="numeric"),
        FeatureSpec(name="Duration", kind="numeric"),
        FeatureSpec(name="Housing", kind="categorical", levels=("own", "rent", "free")),
        FeatureSpec(name="Phone", kind="categorical", levels=("0", "1")),
        FeatureSpec(name="Risk", kind="numeric", role="target"),
        FeatureSpec(name="Sex", kind="numeric", role="protected"),
    )


def make_dataset(n: int = 240, seed: int = 7) -> Dataset:
    gen = np.random.default_rng(seed)
    sex = (gen.random(n) < 0.35).astype(int)
    phone = np.where(gen.random(n) < np.where(sex == 1, 0.7, 0.3), "1", "0")
    income = np.round(gen.normal(50.0, 15.0, n))
    duration = gen.integers(6, 49, n).astype(float)
    housing = gen.choice(["own", "rent", "free"], size=n, p=[0.5, 0.3, 0.2])
    logit = (
        0.05 * (income - 50.0) - 0.04 * (duration - 24.0) + 0.8 * (housing == "own") + 0.9 * (phone == "1") + 0.2
    )
    risk = (gen.random(n) < 1.0 / (1.0 + np.exp(-logit))).astype(int)
    frame = pd.DataFrame(
        {"Income": income, "Duration": duration, "Housing": housing, "Phone": phone, "Risk": risk, "Sex": sex}
    )
    return Dataset(specs=synthetic_specs(), frame=frame)


def german_lines(n: int = 200, seed: int = 3) -> list[str]:
    """Rows in the whitespace-separated German credit format with a learnable outcome."""
    gen = np.random.default_rng(seed)
    specs = german_credit_specs()[:-1]
    lines = []
    for _ in range(n):
        tokens = []
        for spec in specs:
            if spec.role == "target":
                tokens.append("")
            elif spec.name == "Telephone":
                tokens.append(str(gen.choice(["A191", "A192"])))
            elif spec.kind == "categorical":
                tokens.append(str(gen.choice(list(spec.levels))))
            else:
                low, high = GERMAN_NUMERIC_RANGES[spec.name]
                tokens.append(str(int(gen.integers(low, high + 1))))
        good = tokens[0] in ("A13", "A14") or gen.random() < 0.55
        tokens[20] = "1" if good else "2"
        lines.append(" ".join(tokens))
    return lines


def stump(X: EncodedMatrix, column: str, threshold: float, left: float = 0.2, right: float = 0.8) -> TreeModel:
    """Hand-built one-split tree on ``column``."""
    index = X.column_names.index(column)
    goes_left = int((X.values[:, index] <= threshold).sum())
    return TreeModel(
        feature_names=X.column_names,
        hyperparams=TreeHyperparams(max_depth=1),
        seed=0,
        feature=np.array([index, LEAF, LEAF]),
        threshold=np.array([threshold, 0.0, 0.0]),
        left=np.array([1, LEAF, LEAF]),
        right=np.array([2, LEAF, LEAF]),
        value=np.array([0.5, left, right]),
        n_samples=np.array([X.n, goes_left, X.n - goes_left]),
    )


def constant_model(X: EncodedMatrix, score: float = 0.9) -> TreeModel:
    return TreeModel(
        feature_names=X.column_names,
        hyperparams=TreeHyperparams(max_depth=1),
        seed=0,
        feature=np.array([LEAF]),
        threshold=np.array([0.0]),
        left=np.array([LEAF]),
        right=np.array([LEAF]),
        value=np.array([score]),
        n_samples=np.array([X.n]),
    )


def german_credit_path() -> Path | None:
    candidates = [os.environ.get("GERMAN_CREDIT_PATH"), DATA_DIR / "german.data"]
    for candidate in candidates:
        if candidate and Path(candidate).is_file():
            return Path(candidate)
    return None


@pytest.fixture
def synthetic() -> Dataset:
    return make_dataset()


@pytest.fixture
def german_file(tmp_path: Path) -> Path:
    path = tmp_path / "german.data"
    path.write_text("\n".join(german_lines()) + "\n")
    return path


@pytest.fixture(scope="session")
def german() -> Dataset:
    path = german_credit_path()
    if path is None:
        pytest.skip("German credit file not available (set GERMAN_CREDIT_PATH or add tests/data/german.data)")
    return load_german_credit(path)
