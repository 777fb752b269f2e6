from app.clients.storage import ArtifactWriter
from app.commands.context import AuditContext, build_context
from app.core.settings import RunConfig
from app.schemas.fairness import AuditSuite
from app.services.fairness_service import audit_sample, table_rows
from app.services.stats_service import association_table


def run_audit(config: RunConfig, writer: ArtifactWriter, context: AuditContext | None = None) -> AuditSuite:
    """All five tests in the tabular layout, plus the risk classes behind conditional parity."""
    context = context if context is not None else build_context(config)
    suite = audit_sample(context.model, context.sample, config.delta, config.alpha)

    writer.write_json("audit.json", suite)
    writer.write_csv("audit.csv", table_rows(suite), ["test", "p_value"])
    writer.write_json("classes.json", context.clustering_summary())

    by_class = []
    for k in range(context.assignment.n_classes):
        rows = (context.assignment.labels == k).nonzero()[0]
        for item in association_table(context.dataset, rows=rows):
            by_class.append({"class": k + 1, **item.model_dump()})
    writer.write_csv("associations_by_class.csv", by_class, ["class", "feature", "v_target", "v_protected"])
    return suite
