"""Objects shared by the commands: data, encoded rows, scorer and frozen risk classes."""

from dataclasses import dataclass

from app.core.errors import InvalidParameterError
from app.core.logger import logger
from app.core.seeding import derive_seed
from app.core.settings import RunConfig
from app.models.base import Classifier
from app.schemas.clustering import ClusteringSummary
from app.schemas.models import SearchResult
from app.services.clustering_service import RiskClassAssignment, class_profiles, kprototypes
from app.services.dataset_service import (
    Dataset,
    EncodedMatrix,
    load_csv_dataset,
    load_german_credit,
    one_hot_encode,
)
from app.services.fairness_service import AuditSample
from app.services.model_service import load_model, space_for, train_preset, trainer_for
from app.services.search_service import random_search_cv


@dataclass(frozen=True, eq=False)
class AuditContext:
    config: RunConfig
    dataset: Dataset
    matrix: EncodedMatrix
    model: Classifier
    assignment: RiskClassAssignment

    @property
    def sample(self) -> AuditSample:
        return AuditSample(self.matrix, self.dataset.target, self.dataset.protected, self.assignment)

    def clustering_summary(self) -> ClusteringSummary:
        return ClusteringSummary(
            n_classes=self.assignment.n_classes,
            gamma=self.assignment.gamma,
            seed=self.assignment.seed,
            n_iter=self.assignment.n_iter,
            objective=list(self.assignment.objective),
            profiles=class_profiles(self.dataset, self.assignment),
        )


def load_dataset(config: RunConfig) -> Dataset:
    if config.data_path is None:
        raise InvalidParameterError("no input data given (--data)")
    if config.schema_path is not None:
        return load_csv_dataset(config.data_path, config.schema_path)
    return load_german_credit(config.data_path)


def fit_model(config: RunConfig, X: EncodedMatrix, dataset: Dataset) -> tuple[Classifier, SearchResult | None]:
    """Train the configured preset, through random search when ``search_draws`` is positive."""
    tree_seed = derive_seed(config.seed, "tree")
    if config.search_draws == 0:
        return train_preset(config.preset, X, dataset.target, seed=tree_seed), None

    trainer = trainer_for(config.preset)
    search = random_search_cv(
        space_for(config.preset),
        X,
        dataset.target,
        k=config.folds,
        draws=config.search_draws,
        seed=config.seed,
        trainer=trainer,
        delta=config.delta,
    )
    return trainer(search.best_params, X, dataset.target, tree_seed), search


def risk_classes(config: RunConfig, dataset: Dataset) -> RiskClassAssignment:
    return kprototypes(
        dataset,
        n_classes=config.n_classes,
        gamma=config.gamma,
        seed=derive_seed(config.seed, "clustering"),
        max_iter=config.clustering_max_iter,
    )


def build_context(
    config: RunConfig, dataset: Dataset | None = None, model: Classifier | None = None
) -> AuditContext:
    """Load or reuse the data, load or train the scorer and cluster applicants into risk classes."""
    dataset = dataset if dataset is not None else load_dataset(config)
    matrix = one_hot_encode(dataset, include_protected=config.include_protected)
    if model is None and config.model_path is not None:
        model = load_model(config.model_path)
        logger.info("model_loaded", path=str(config.model_path), preset=model.preset)
    if model is None:
        model = fit_model(config, matrix, dataset)[0]
    return AuditContext(config, dataset, matrix, model, risk_classes(config, dataset))
