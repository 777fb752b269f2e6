from typing import Any

from app.clients.storage import ArtifactWriter
from app.commands.context import AuditContext, build_context
from app.core.logger import logger
from app.core.seeding import derive_seed
from app.core.settings import RunConfig
from app.schemas.fpdp import CandidateVerdict
from app.schemas.mitigation import TradeoffReport
from app.services.fpdp_service import candidate_variables
from app.services.mitigation_service import (
    baseline_row,
    panel_a_rows,
    panel_b_rows,
    tradeoff_rows,
    tradeoff_table,
)

TRADEOFF_COLUMNS = ["strategy", "SP", "CSP", "EOP", "EO", "PE", "AUC", "PCC", "fair", "four_fifths"]


def run_mitigate(
    config: RunConfig,
    writer: ArtifactWriter,
    context: AuditContext | None = None,
    verdicts: list[CandidateVerdict] | None = None,
) -> dict[str, TradeoffReport | None]:
    """Re-estimation without each candidate and fixing each witness value, ranked by AUC.

    Candidates come from the first configured hypothesis; fairness is judged at ``fpdp_alpha``.
    """
    context = context if context is not None else build_context(config)
    sample, model = context.sample, context.model
    if verdicts is None:
        verdicts = candidate_variables(
            model,
            sample,
            config.hypotheses[0],
            alpha=config.fpdp_alpha,
            features=config.features,
            delta=config.delta,
            grid=config.grid,
            grid_points=config.grid_points,
        )
    chosen = [item for item in verdicts if item.is_candidate]

    options: dict[str, Any] = {
        "alpha": config.fpdp_alpha,
        "delta": config.delta,
        "fair_includes_pe": config.fair_includes_pe,
    }
    baseline = baseline_row(model, sample, **options)
    panels: dict[str, TradeoffReport | None] = {"reestimate": None, "fix_value": None}
    if not chosen:
        logger.warning("no_candidate_variables", hypothesis=config.hypotheses[0].value)
    else:
        reestimated = panel_a_rows(
            model.preset or config.preset,
            sample,
            [item.feature for item in chosen],
            seed=derive_seed(config.seed, "reestimate"),
            hyperparams=model.hyperparams,
            **options,
        )
        panels["reestimate"] = tradeoff_table(reestimated, baseline)
        panels["fix_value"] = tradeoff_table(panel_b_rows(model, sample, chosen, **options), baseline)

    writer.write_json(
        "mitigation.json",
        {
            "baseline": baseline.model_dump(mode="json"),
            **{name: report.model_dump(mode="json") if report else None for name, report in panels.items()},
        },
    )
    for name, report in panels.items():
        writer.write_csv(f"mitigation_{name}.csv", tradeoff_rows(report) if report else [], TRADEOFF_COLUMNS)
    return panels
