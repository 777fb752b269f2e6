from typing import Protocol, runtime_checkable

import numpy as np

from app.schemas.models import LogisticDocument, LogisticHyperparams, TreeDocument, TreeHyperparams


@runtime_checkable
class Classifier(Protocol):
    """Trained scorer: probability of being a good-type borrower for each encoded row."""

    @property
    def feature_names(self) -> tuple[str, ...]: ...

    @property
    def preset(self) -> str | None: ...

    @property
    def hyperparams(self) -> LogisticHyperparams | TreeHyperparams: ...

    def predict_proba(self, values: np.ndarray) -> np.ndarray: ...

    def used_columns(self) -> list[int]: ...

    def to_document(self) -> LogisticDocument | TreeDocument: ...
