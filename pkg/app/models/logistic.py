from dataclasses import dataclass

import numpy as np

from app.schemas.models import LogisticDocument, LogisticHyperparams, StandardizationParams


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass(frozen=True, eq=False)
class LogisticModel:
    """(Ridge) logistic regression on raw encoded rows; numeric columns are standardized internally."""

    feature_names: tuple[str, ...]
    weights: np.ndarray
    intercept: float
    hyperparams: LogisticHyperparams
    standardization: StandardizationParams
    converged: bool
    n_iter: int
    preset: str | None = None

    def _standardized(self, values: np.ndarray) -> np.ndarray:
        out = np.array(values, dtype=float)
        columns = self.standardization.columns
        if columns:
            out[:, columns] = (out[:, columns] - np.asarray(self.standardization.means)) / np.asarray(
                self.standardization.stds
            )
        return out

    def decision_function(self, values: np.ndarray) -> np.ndarray:
        return self._standardized(values) @ self.weights + self.intercept

    def predict_proba(self, values: np.ndarray) -> np.ndarray:
        return sigmoid(self.decision_function(values))

    def used_columns(self) -> list[int]:
        return [int(index) for index in np.flatnonzero(self.weights != 0.0)]

    def to_document(self) -> LogisticDocument:
        return LogisticDocument(
            preset=self.preset,
            feature_names=list(self.feature_names),
            weights=[float(w) for w in self.weights],
            intercept=float(self.intercept),
            hyperparams=self.hyperparams,
            standardization=self.standardization,
            converged=self.converged,
            n_iter=self.n_iter,
        )

    @classmethod
    def from_document(cls, document: LogisticDocument) -> "LogisticModel":
        return cls(
            feature_names=tuple(document.feature_names),
            weights=np.asarray(document.weights, dtype=float),
            intercept=document.intercept,
            hyperparams=document.hyperparams,
            standardization=document.standardization,
            converged=document.converged,
            n_iter=document.n_iter,
            preset=document.preset,
        )
