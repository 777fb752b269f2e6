from app.clients.storage import ArtifactWriter
from app.commands.context import load_dataset
from app.core.logger import logger
from app.core.settings import RunConfig
from app.schemas.dataset import DatasetSummary
from app.services.dataset_service import Dataset, summarize_dataset
from app.services.stats_service import association_table

ASSOCIATION_COLUMNS = ["feature", "v_target", "v_protected"]


def run_ingest(config: RunConfig, writer: ArtifactWriter, dataset: Dataset | None = None) -> DatasetSummary:
    """Dataset summary and the Cramer's V association data."""
    dataset = dataset if dataset is not None else load_dataset(config)
    summary = summarize_dataset(dataset)
    associations = association_table(dataset)

    writer.write_json("summary.json", summary)
    writer.write_csv("associations.csv", [item.model_dump() for item in associations], ASSOCIATION_COLUMNS)
    logger.info(
        "ingest_completed",
        n=summary.n,
        protected=summary.protected_count,
        default_rate_protected=summary.default_rate_protected,
        default_rate_unprotected=summary.default_rate_unprotected,
    )
    return summary
