"""Random hyperparameter search scored by k-fold cross-validated PCC."""

from collections.abc import Callable, Mapping
from typing import Any

import numpy as np

from app.core.errors import InvalidParameterError
from app.core.logger import logger
from app.core.seeding import derive_seed, rng
from app.models.base import Classifier
from app.schemas.models import CvResult, HyperparamSpace, SearchResult
from app.services.dataset_service import EncodedMatrix, kfold_indices
from app.services.metrics_service import pcc
from app.services.model_service import classify

Trainer = Callable[[Mapping[str, Any], EncodedMatrix, np.ndarray, int], Classifier]


def draw_configurations(space: HyperparamSpace, draws: int, seed: int) -> list[dict[str, Any]]:
    """``draws`` configurations, each dimension sampled uniformly and independently (with replacement)."""
    generator = rng(seed)
    configurations = []
    for _ in range(draws):
        configurations.append(
            {name: options[int(generator.integers(len(options)))] for name, options in space.values.items()}
        )
    return configurations


def cross_validate(
    params: Mapping[str, Any],
    X: EncodedMatrix,
    y: np.ndarray,
    folds: list[np.ndarray],
    trainer: Trainer,
    seed: int,
    delta: float = 0.5,
) -> CvResult:
    labels = np.asarray(y)
    scores = []
    for held_out in folds:
        train_rows = np.setdiff1d(np.arange(X.n), held_out)
        model = trainer(params, X.take(train_rows), labels[train_rows], seed)
        scores.append(pcc(labels[held_out], classify(model, X.take(held_out), delta)))
    return CvResult(params=dict(params), fold_scores=scores, mean_score=float(np.mean(scores)))


def random_search_cv(
    space: HyperparamSpace,
    X: EncodedMatrix,
    y: np.ndarray,
    k: int,
    draws: int,
    seed: int,
    trainer: Trainer,
    delta: float = 0.5,
) -> SearchResult:
    """Best configuration by mean out-of-fold PCC; ties go to the earliest draw.

    All draws share one fold partition so their scores are comparable.
    """
    if draws < 1:
        raise InvalidParameterError(f"at least one draw is needed, got {draws}")
    folds = kfold_indices(X.n, k, derive_seed(seed, "cv"))
    configurations = draw_configurations(space, draws, derive_seed(seed, "search"))
    tree_seed = derive_seed(seed, "tree")

    table: list[CvResult] = []
    for index, params in enumerate(configurations):
        result = cross_validate(params, X, y, folds, trainer, tree_seed, delta)
        table.append(result)
        logger.debug("search_draw_scored", space=space.name, draw=index, score=result.mean_score)

    # max keeps the first of equal scores
    best = max(table, key=lambda row: row.mean_score)
    logger.info("search_finished", space=space.name, draws=draws, best_score=best.mean_score, best=best.params)
    return SearchResult(space=space.name, best_params=best.params, best_score=best.mean_score, table=table)
