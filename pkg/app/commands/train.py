from app.clients.storage import ArtifactWriter
from app.commands.context import fit_model, load_dataset
from app.core.logger import logger
from app.core.settings import RunConfig
from app.models.base import Classifier
from app.schemas.models import ModelMetrics
from app.services.dataset_service import Dataset, one_hot_encode
from app.services.metrics_service import auc, pcc
from app.services.model_service import model_to_json, predict_proba, used_features


def run_train(
    config: RunConfig, writer: ArtifactWriter, dataset: Dataset | None = None
) -> tuple[Classifier, ModelMetrics]:
    """Train the configured scorer and report its in-sample PCC and AUC."""
    dataset = dataset if dataset is not None else load_dataset(config)
    X = one_hot_encode(dataset, include_protected=config.include_protected)
    model, search = fit_model(config, X, dataset)

    scores = predict_proba(model, X)
    metrics = ModelMetrics(
        preset=model.preset,
        include_protected=config.include_protected,
        n_features=X.p,
        pcc=pcc(dataset.target, (scores > config.delta).astype(int)),
        auc=auc(dataset.target, scores),
        used_features=used_features(model, X),
    )

    writer.write_text("model.json", model_to_json(model))
    writer.write_json("metrics.json", metrics)
    if search is not None:
        writer.write_json("search.json", search)
    logger.info("train_completed", preset=model.preset, pcc=metrics.pcc, auc=metrics.auc, columns=X.p)
    return model, metrics
