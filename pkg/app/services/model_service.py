"""Training, scoring and persistence of the credit scoring classifiers."""

import json
from collections.abc import Callable, Mapping
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from app.core.errors import InvalidParameterError, ModelError
from app.core.logger import logger
from app.core.seeding import rng
from app.models.base import Classifier
from app.models.logistic import LogisticModel, sigmoid
from app.models.tree import LEAF, TreeModel
from app.schemas.models import (
    MODEL_FORMAT_VERSION,
    HyperparamSpace,
    LogisticDocument,
    LogisticHyperparams,
    ModelEnvelope,
    StandardizationParams,
    TreeDocument,
    TreeHyperparams,
)
from app.services.dataset_service import EncodedMatrix, apply_standardization, standardize

SPLIT_EPSILON = 1e-12
LINE_SEARCH_MIN_STEP = 1e-10

PRESETS: dict[str, LogisticHyperparams | TreeHyperparams] = {
    "lr": LogisticHyperparams(lam=0.0),
    "ridge": LogisticHyperparams(lam=0.2001),
    "tree": TreeHyperparams(
        criterion="gini",
        max_depth=20,
        min_samples_split=2,
        min_samples_leaf=5,
        max_features="sqrt",
        min_impurity_decrease=0.0,
    ),
    "tree-prime": TreeHyperparams(
        criterion="gini",
        max_depth=7,
        min_samples_split=56,
        min_samples_leaf=18,
        max_features="all",
        min_impurity_decrease=0.0,
    ),
}

_TREE_COMMON: dict[str, list[Any]] = {
    "max_features": ["all", "sqrt", "log2"],
    "min_impurity_decrease": [round(0.1 * step, 1) for step in range(10)],
    "criterion": ["entropy", "gini"],
}

SPACES: dict[str, HyperparamSpace] = {
    "tree": HyperparamSpace(
        name="tree",
        values={
            "max_depth": list(range(1, 30)),
            "min_samples_split": list(range(2, 10)),
            "min_samples_leaf": list(range(1, 20)),
            **_TREE_COMMON,
        },
    ),
    "tree-prime": HyperparamSpace(
        name="tree-prime",
        values={
            "max_depth": list(range(1, 10)),
            "min_samples_split": list(range(2, 60)),
            "min_samples_leaf": list(range(1, 60)),
            **_TREE_COMMON,
        },
    ),
    "ridge": HyperparamSpace(name="ridge", values={"lam": [0.0001 + 0.2 * step for step in range(101)]}),
}


def _check_labels(X: EncodedMatrix, y: np.ndarray) -> np.ndarray:
    labels = np.asarray(y)
    if labels.shape != (X.n,):
        raise InvalidParameterError(f"{labels.size} labels for {X.n} rows")
    if not np.isin(labels, (0, 1)).all():
        raise InvalidParameterError("labels must be binary")
    return labels.astype(float)


def _fit_standardization(X: EncodedMatrix) -> StandardizationParams:
    """Standardization of the numeric columns that vary; constant ones are left as they are."""
    names = [X.column_names[index] for index in X.numeric_columns() if X.values[:, index].std() > 0.0]
    return standardize(X, names)[1]


def _logistic_objective(Z: np.ndarray, y: np.ndarray, w: np.ndarray, lam: float) -> float:
    z = Z @ w
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * lam * np.dot(w[1:], w[1:]))


def _logistic_gradient(Z: np.ndarray, y: np.ndarray, w: np.ndarray, lam: float) -> np.ndarray:
    penalty = np.full(len(w), lam)
    penalty[0] = 0.0
    return Z.T @ (sigmoid(Z @ w) - y) / len(y) + penalty * w


def train_logistic(
    X: EncodedMatrix,
    y: np.ndarray,
    lam: float = 0.0,
    tol: float = 1e-8,
    max_iter: int = 100,
    preset: str | None = None,
) -> LogisticModel:
    """Minimize mean negative log-likelihood + ``lam``/2 * ||w||^2 by damped Newton steps.

    The intercept is unpenalized. Steps are least-squares solutions of the Newton system,
    so the redundant columns of a full one-hot encoding do not break the solve.
    """
    hyperparams = LogisticHyperparams(lam=lam, tol=tol, max_iter=max_iter)
    labels = _check_labels(X, y)
    standardization = _fit_standardization(X)

    Z = np.hstack([np.ones((X.n, 1)), apply_standardization(X.values, standardization)])
    penalty = np.full(Z.shape[1], lam)
    penalty[0] = 0.0

    w = np.zeros(Z.shape[1])
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        gradient = _logistic_gradient(Z, labels, w, lam)
        if np.linalg.norm(gradient) <= tol:
            converged = True
            break
        p = sigmoid(Z @ w)
        hessian = (Z * (p * (1.0 - p))[:, None]).T @ Z / X.n + np.diag(penalty)
        step = np.linalg.lstsq(hessian, gradient, rcond=None)[0]

        current = _logistic_objective(Z, labels, w, lam)
        slope = float(gradient @ step)
        t = 1.0
        while t > LINE_SEARCH_MIN_STEP:
            if _logistic_objective(Z, labels, w - t * step, lam) <= current - 1e-4 * t * slope:
                break
            t *= 0.5
        w = w - t * step

    if not converged:
        gradient = _logistic_gradient(Z, labels, w, lam)
        converged = bool(np.linalg.norm(gradient) <= tol)
    if not converged:
        logger.warning(
            "logistic_not_converged", lam=lam, max_iter=max_iter, gradient_norm=float(np.linalg.norm(gradient))
        )

    return LogisticModel(
        feature_names=X.column_names,
        weights=w[1:],
        intercept=float(w[0]),
        hyperparams=hyperparams,
        standardization=standardization,
        converged=converged,
        n_iter=iteration,
        preset=preset,
    )


def _impurity(positives: np.ndarray, totals: np.ndarray, criterion: str) -> np.ndarray:
    share = np.divide(positives, totals, out=np.zeros_like(positives, dtype=float), where=totals > 0)
    if criterion == "gini":
        return 2.0 * share * (1.0 - share)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(share > 0, share * np.log2(share), 0.0) + np.where(
            share < 1, (1.0 - share) * np.log2(1.0 - share), 0.0
        )
    return -terms


def _features_per_split(p: int, rule: str) -> int:
    if rule == "sqrt":
        return max(1, int(np.sqrt(p)))
    if rule == "log2":
        return max(1, int(np.log2(p)))
    return p


class _TreeBuilder:
    """Depth-first CART growth into flat, preorder node arrays."""

    def __init__(self, values: np.ndarray, labels: np.ndarray, hyperparams: TreeHyperparams, seed: int):
        self.values = values
        self.labels = labels
        self.h = hyperparams
        self.n_total = len(labels)
        self.generator = rng(seed)
        self.n_candidates = _features_per_split(values.shape[1], hyperparams.max_features)
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.n_samples: list[int] = []

    def _candidate_columns(self) -> np.ndarray:
        p = self.values.shape[1]
        if self.n_candidates >= p:
            return np.arange(p)
        return np.sort(self.generator.choice(p, size=self.n_candidates, replace=False))

    def _best_split(self, rows: np.ndarray) -> tuple[int, float, float] | None:
        """(column, threshold, weighted impurity decrease) of the best admissible split, if any."""
        m = len(rows)
        y = self.labels[rows]
        total_pos = float(y.sum())
        node_impurity = float(_impurity(np.array([total_pos]), np.array([float(m)]), self.h.criterion)[0])
        min_leaf = self.h.min_samples_leaf

        best: tuple[int, float, float] | None = None
        for column in self._candidate_columns():
            x = self.values[rows, column]
            order = np.argsort(x, kind="stable")
            xs, ys = x[order], y[order]
            left_n = np.arange(1, m, dtype=float)
            left_pos = np.cumsum(ys)[:-1]
            right_n = m - left_n
            valid = (xs[:-1] < xs[1:]) & (left_n >= min_leaf) & (right_n >= min_leaf)
            if not valid.any():
                continue
            children = (
                left_n * _impurity(left_pos, left_n, self.h.criterion)
                + right_n * _impurity(total_pos - left_pos, right_n, self.h.criterion)
            ) / m
            decrease = np.where(valid, (m / self.n_total) * (node_impurity - children), -np.inf)
            top = decrease.max()
            # lowest threshold among (numerically) tied positions
            position = int(np.flatnonzero(decrease >= top - SPLIT_EPSILON)[0])
            gain = float(decrease[position])
            if best is None or gain > best[2] + SPLIT_EPSILON:
                threshold = 0.5 * (xs[position] + xs[position + 1])
                if threshold >= xs[position + 1]:
                    threshold = float(xs[position])
                best = (int(column), float(threshold), gain)
        return best

    def _new_node(self, rows: np.ndarray) -> int:
        node = len(self.feature)
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(float(self.labels[rows].mean()))
        self.n_samples.append(len(rows))
        return node

    def grow(self, rows: np.ndarray, depth: int) -> int:
        node = self._new_node(rows)
        m = len(rows)
        positives = self.labels[rows].sum()
        if (
            depth >= self.h.max_depth
            or m < self.h.min_samples_split
            or m < 2 * self.h.min_samples_leaf
            or positives in (0, m)
        ):
            return node
        split = self._best_split(rows)
        if split is None or split[2] + SPLIT_EPSILON < self.h.min_impurity_decrease:
            return node

        column, threshold, _ = split
        goes_left = self.values[rows, column] <= threshold
        self.feature[node] = column
        self.threshold[node] = threshold
        self.left[node] = self.grow(rows[goes_left], depth + 1)
        self.right[node] = self.grow(rows[~goes_left], depth + 1)
        return node


def train_tree(
    X: EncodedMatrix, y: np.ndarray, hyperparams: TreeHyperparams, seed: int = 0, preset: str | None = None
) -> TreeModel:
    """Grow a binary CART tree. ``seed`` drives the per-split feature subsets only."""
    labels = _check_labels(X, y)
    builder = _TreeBuilder(X.values, labels, hyperparams, seed)
    builder.grow(np.arange(X.n), depth=0)
    model = TreeModel(
        feature_names=X.column_names,
        hyperparams=hyperparams,
        seed=seed,
        feature=np.asarray(builder.feature, dtype=int),
        threshold=np.asarray(builder.threshold, dtype=float),
        left=np.asarray(builder.left, dtype=int),
        right=np.asarray(builder.right, dtype=int),
        value=np.asarray(builder.value, dtype=float),
        n_samples=np.asarray(builder.n_samples, dtype=int),
        preset=preset,
    )
    logger.debug("tree_grown", nodes=model.node_count, depth=model.depth(), seed=seed)
    return model


def train_with(
    hyperparams: LogisticHyperparams | TreeHyperparams,
    X: EncodedMatrix,
    y: np.ndarray,
    seed: int = 0,
    preset: str | None = None,
) -> Classifier:
    if isinstance(hyperparams, LogisticHyperparams):
        return train_logistic(X, y, hyperparams.lam, hyperparams.tol, hyperparams.max_iter, preset=preset)
    return train_tree(X, y, hyperparams, seed=seed, preset=preset)


def preset_hyperparams(preset: str) -> LogisticHyperparams | TreeHyperparams:
    if preset not in PRESETS:
        raise ModelError(f"unknown preset {preset!r}; choose one of {sorted(PRESETS)}")
    return PRESETS[preset]


def train_preset(preset: str, X: EncodedMatrix, y: np.ndarray, seed: int = 0) -> Classifier:
    model = train_with(preset_hyperparams(preset), X, y, seed=seed, preset=preset)
    logger.info("model_trained", preset=preset, n=X.n, columns=X.p)
    return model


def space_for(preset: str) -> HyperparamSpace:
    """Search space tuned for a preset; plain logistic regression has nothing to tune."""
    name = "ridge" if preset == "ridge" else preset
    if name not in SPACES:
        raise ModelError(f"preset {preset!r} has no hyperparameter space")
    return SPACES[name]


def hyperparams_from(preset: str, params: Mapping[str, Any]) -> LogisticHyperparams | TreeHyperparams:
    base = preset_hyperparams(preset)
    try:
        return type(base).model_validate({**base.model_dump(), **params})
    except ValidationError as e:
        raise InvalidParameterError(str(e)) from e


def trainer_for(preset: str) -> Callable[[Mapping[str, Any], EncodedMatrix, np.ndarray, int], Classifier]:
    """Training callback for random search: hyperparameter draw, rows, labels, seed."""

    def train(params: Mapping[str, Any], X: EncodedMatrix, y: np.ndarray, seed: int) -> Classifier:
        return train_with(hyperparams_from(preset, params), X, y, seed=seed, preset=preset)

    return train


def _aligned_values(model: Classifier, X: EncodedMatrix) -> np.ndarray:
    if tuple(model.feature_names) != tuple(X.column_names):
        missing = sorted(set(model.feature_names) - set(X.column_names))
        extra = sorted(set(X.column_names) - set(model.feature_names))
        raise ModelError(f"model columns do not match the data (missing {missing}, unexpected {extra})")
    return X.values


def predict_proba(model: Classifier, X: EncodedMatrix) -> np.ndarray:
    return np.asarray(model.predict_proba(_aligned_values(model, X)), dtype=float)


def classify(model: Classifier, X: EncodedMatrix, delta: float = 0.5) -> np.ndarray:
    """Predicted labels: 1 where the score strictly exceeds ``delta``."""
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    return (predict_proba(model, X) > delta).astype(int)


def used_features(model: Classifier, X: EncodedMatrix) -> list[str]:
    """Original features whose columns the model actually relies on, in encoding order."""
    _aligned_values(model, X)
    used = set(model.used_columns())
    return [name for name, columns in X.groups.items() if used.intersection(columns)]


def model_to_json(model: Classifier) -> str:
    return json.dumps(ModelEnvelope(model=model.to_document()).model_dump(mode="json"), sort_keys=True, indent=2)


def model_from_json(text: str) -> Classifier:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"model document is not valid JSON: {e}") from e
    version = raw.get("model", {}).get("format_version") if isinstance(raw, dict) else None
    if version != MODEL_FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {version!r}")
    try:
        document = ModelEnvelope.model_validate(raw).model
    except ValidationError as e:
        raise ModelError(f"invalid model document: {e}") from e
    if isinstance(document, LogisticDocument):
        return LogisticModel.from_document(document)
    if isinstance(document, TreeDocument):
        return TreeModel.from_document(document)
    raise ModelError(f"unknown model kind {type(document).__name__}")


def save_model(model: Classifier, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model_to_json(model))
    logger.info("model_saved", path=str(path))


def load_model(path: Path | str) -> Classifier:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ModelError(f"cannot read model {path}: {e}") from e
    return model_from_json(text)
