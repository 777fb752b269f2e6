"""Accuracy (PCC) and ranking quality (AUC) of a scorer."""

from typing import Any

import numpy as np
import pandas as pd

from app.core.errors import DegenerateDataError, InvalidParameterError


def pcc(y_true: Any, y_pred: Any) -> float:
    """Percentage of correctly classified rows, in [0, 100]."""
    truth, predicted = np.asarray(y_true), np.asarray(y_pred)
    if truth.shape != predicted.shape:
        raise InvalidParameterError(f"length mismatch: {truth.size} vs {predicted.size}")
    if truth.size == 0:
        raise InvalidParameterError("cannot score an empty sample")
    return 100.0 * float((truth == predicted).sum()) / truth.size


def auc(y_true: Any, scores: Any) -> float:
    """Area under the ROC curve by the Mann-Whitney rank statistic; tied scores count one half."""
    truth, score = np.asarray(y_true).astype(int), np.asarray(scores, dtype=float)
    if truth.shape != score.shape:
        raise InvalidParameterError(f"length mismatch: {truth.size} vs {score.size}")
    n_pos = int((truth == 1).sum())
    n_neg = int((truth == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise DegenerateDataError("AUC needs at least one positive and one negative label")
    ranks = pd.Series(score).rank(method="average").to_numpy()
    rank_sum = float(ranks[truth == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
