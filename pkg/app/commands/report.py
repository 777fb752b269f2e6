from app.clients.storage import ArtifactWriter
from app.commands.audit import run_audit
from app.commands.context import build_context, load_dataset
from app.commands.fpdp import run_fpdp
from app.commands.ingest import run_ingest
from app.commands.mitigate import run_mitigate
from app.commands.train import run_train
from app.core.logger import logger
from app.core.settings import RunConfig


def run_report(config: RunConfig, writer: ArtifactWriter) -> None:
    """Ingest, train, audit, sweep and mitigate into one output directory."""
    dataset = load_dataset(config)
    run_ingest(config, writer, dataset)
    model, _ = run_train(config, writer, dataset)
    context = build_context(config, dataset, model)
    suite = run_audit(config, writer, context)
    candidates = run_fpdp(config, writer, context)
    run_mitigate(config, writer, context, candidates[config.hypotheses[0]])
    logger.info("report_completed", rejected=[tag.value for tag, report in suite.reports.items() if report.reject])
