from app.clients.storage import ArtifactWriter
from app.commands.context import AuditContext, build_context
from app.core.settings import RunConfig
from app.schemas.fairness import HypothesisTag
from app.schemas.fpdp import CandidateVerdict
from app.services.fpdp_service import sweep_features, verdict

CURVE_COLUMNS = ["feature", "value", "statistic", "dof", "p_value", "degenerate"]


def run_fpdp(
    config: RunConfig, writer: ArtifactWriter, context: AuditContext | None = None
) -> dict[HypothesisTag, list[CandidateVerdict]]:
    """One curve CSV per (hypothesis, feature), a JSON index and the candidate variables."""
    context = context if context is not None else build_context(config)
    candidates: dict[HypothesisTag, list[CandidateVerdict]] = {}
    index: dict[str, dict[str, dict[str, object]]] = {}

    for tag in config.hypotheses:
        curves = sweep_features(
            context.model,
            context.sample,
            tag,
            alpha=config.fpdp_alpha,
            features=config.features,
            delta=config.delta,
            grid=config.grid,
            grid_points=config.grid_points,
        )
        index[tag.value] = {}
        for curve in curves:
            path = f"fpdp/{tag.value}/{curve.feature}.csv"
            rows = [{"feature": curve.feature, **point.model_dump()} for point in curve.points]
            writer.write_csv(path, rows, CURVE_COLUMNS)
            index[tag.value][curve.feature] = {
                "path": path,
                "kind": curve.kind,
                "baseline_statistic": curve.baseline_statistic,
                "baseline_p_value": curve.baseline_p_value,
                "baseline_reject": curve.baseline_reject,
                "alpha": curve.alpha,
            }
        candidates[tag] = [verdict(curve) for curve in curves]

    writer.write_json("fpdp/index.json", index)
    writer.write_json(
        "candidates.json",
        {tag.value: [item.model_dump(mode="json") for item in verdicts] for tag, verdicts in candidates.items()},
    )
    return candidates
