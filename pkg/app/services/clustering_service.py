"""K-prototypes partition of applicants into risk classes over mixed numeric/categorical features."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.core.errors import InvalidParameterError
from app.core.logger import logger
from app.core.seeding import rng
from app.schemas.clustering import ClassProfile
from app.services.dataset_service import Dataset


@dataclass(frozen=True, eq=False)
class ClusteringInputs:
    numeric: np.ndarray
    categorical: np.ndarray
    numeric_features: tuple[str, ...]
    categorical_features: tuple[str, ...]
    levels: tuple[tuple[str, ...], ...]


@dataclass(frozen=True, eq=False)
class RiskClassAssignment:
    labels: np.ndarray
    numeric_prototypes: np.ndarray
    categorical_prototypes: np.ndarray
    gamma: float
    seed: int
    n_iter: int
    objective: tuple[float, ...]

    @property
    def n_classes(self) -> int:
        return int(self.numeric_prototypes.shape[0])

    def sizes(self) -> list[int]:
        return np.bincount(self.labels, minlength=self.n_classes).tolist()


def _level_codes(values: np.ndarray, levels: Sequence[str]) -> np.ndarray:
    index = {level: position for position, level in enumerate(levels)}
    return np.array([index[value] for value in values], dtype=int)


def clustering_inputs(d: Dataset) -> ClusteringInputs:
    """Standardized numeric block and level-index categorical block of the role-feature columns.

    Target, protected and excluded columns never enter the distance.
    """
    numeric_specs = [spec for spec in d.feature_specs if spec.kind == "numeric"]
    categorical_specs = [spec for spec in d.feature_specs if spec.kind == "categorical"]

    if numeric_specs:
        raw = np.column_stack([d.frame[spec.name].to_numpy(dtype=float) for spec in numeric_specs])
        means, stds = raw.mean(axis=0), raw.std(axis=0)
        # constant columns carry no information and become zero
        numeric = np.where(stds > 0, (raw - means) / np.where(stds > 0, stds, 1.0), 0.0)
    else:
        numeric = np.empty((d.n, 0))

    if categorical_specs:
        categorical = np.column_stack(
            [_level_codes(d.frame[spec.name].to_numpy(dtype=str), spec.levels) for spec in categorical_specs]
        )
    else:
        categorical = np.empty((d.n, 0), dtype=int)

    return ClusteringInputs(
        numeric=numeric,
        categorical=categorical,
        numeric_features=tuple(spec.name for spec in numeric_specs),
        categorical_features=tuple(spec.name for spec in categorical_specs),
        levels=tuple(spec.levels for spec in categorical_specs),
    )


def default_gamma(numeric: np.ndarray) -> float:
    """Half the mean standard deviation of the (standardized) numeric columns."""
    if numeric.shape[1] == 0:
        return 1.0
    return 0.5 * float(numeric.std(axis=0).mean())


def _distances(
    inputs: ClusteringInputs, numeric_prototypes: np.ndarray, categorical_prototypes: np.ndarray, gamma: float
) -> np.ndarray:
    numeric_part = ((inputs.numeric[:, None, :] - numeric_prototypes[None, :, :]) ** 2).sum(axis=2)
    mismatches = (inputs.categorical[:, None, :] != categorical_prototypes[None, :, :]).sum(axis=2)
    return numeric_part + gamma * mismatches


def _update_prototypes(
    inputs: ClusteringInputs, labels: np.ndarray, n_classes: int
) -> tuple[np.ndarray, np.ndarray]:
    numeric = np.zeros((n_classes, inputs.numeric.shape[1]))
    categorical = np.zeros((n_classes, inputs.categorical.shape[1]), dtype=int)
    for k in range(n_classes):
        members = labels == k
        numeric[k] = inputs.numeric[members].mean(axis=0)
        for j, levels in enumerate(inputs.levels):
            # ties resolve to the first declared level
            categorical[k, j] = int(np.argmax(np.bincount(inputs.categorical[members, j], minlength=len(levels))))
    return numeric, categorical


def _reseed_empty(distances: np.ndarray, labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Move the point farthest from its prototype into each empty class."""
    labels = labels.copy()
    for k in range(n_classes):
        if (labels == k).any():
            continue
        counts = np.bincount(labels, minlength=n_classes)
        own = distances[np.arange(len(labels)), labels]
        movable = counts[labels] > 1
        candidate = int(np.argmax(np.where(movable, own, -np.inf)))
        logger.info("cluster_reseeded", cluster=k, row=candidate)
        labels[candidate] = k
    return labels


def kprototypes(
    d: Dataset,
    n_classes: int = 2,
    gamma: float | None = None,
    seed: int = 0,
    max_iter: int = 100,
    initial: Sequence[int] | None = None,
) -> RiskClassAssignment:
    """Lloyd-style k-prototypes: squared Euclidean on standardized numerics plus ``gamma`` per categorical mismatch.

    ``initial`` overrides the seed-driven choice of starting rows.
    """
    if n_classes < 2:
        raise InvalidParameterError(f"at least two classes are needed, got {n_classes}")
    if d.n < n_classes:
        raise InvalidParameterError(f"cannot split {d.n} rows into {n_classes} classes")
    if gamma is not None and gamma < 0:
        raise InvalidParameterError("gamma must be non-negative")
    if max_iter < 1:
        raise InvalidParameterError("max_iter must be at least 1")

    inputs = clustering_inputs(d)
    weight = default_gamma(inputs.numeric) if gamma is None else float(gamma)

    if initial is None:
        start = rng(seed).choice(d.n, size=n_classes, replace=False)
    else:
        start = np.asarray(initial, dtype=int)
        if len(start) != n_classes or len(set(start.tolist())) != n_classes:
            raise InvalidParameterError("initial prototypes must be distinct rows, one per class")
    numeric_prototypes = inputs.numeric[start].copy()
    categorical_prototypes = inputs.categorical[start].copy()

    labels = np.full(d.n, -1)
    objective: list[float] = []
    iteration = 0
    for iteration in range(1, max_iter + 1):
        distances = _distances(inputs, numeric_prototypes, categorical_prototypes, weight)
        new_labels = _reseed_empty(distances, distances.argmin(axis=1), n_classes)
        numeric_prototypes, categorical_prototypes = _update_prototypes(inputs, new_labels, n_classes)
        final = _distances(inputs, numeric_prototypes, categorical_prototypes, weight)
        objective.append(float(final[np.arange(d.n), new_labels].sum()))
        converged = np.array_equal(new_labels, labels)
        labels = new_labels
        if converged:
            break

    assignment = RiskClassAssignment(
        labels=labels,
        numeric_prototypes=numeric_prototypes,
        categorical_prototypes=categorical_prototypes,
        gamma=weight,
        seed=seed,
        n_iter=iteration,
        objective=tuple(objective),
    )
    logger.info("risk_classes_built", n_classes=n_classes, sizes=assignment.sizes(), gamma=weight, n_iter=iteration)
    return assignment


def class_profiles(d: Dataset, assignment: RiskClassAssignment) -> list[ClassProfile]:
    profiles = []
    y, protected = d.target, d.protected
    for k in range(assignment.n_classes):
        members = assignment.labels == k
        frame = d.frame[members]
        profiles.append(
            ClassProfile(
                label=k + 1,
                size=int(members.sum()),
                protected_share=float(protected[members].mean()),
                default_rate=float((y[members] == 0).mean()),
                numeric_means={
                    spec.name: float(frame[spec.name].mean()) for spec in d.feature_specs if spec.kind == "numeric"
                },
                categorical_modes={
                    spec.name: str(frame[spec.name].mode().iloc[0])
                    for spec in d.feature_specs
                    if spec.kind == "categorical"
                },
            )
        )
    return profiles
