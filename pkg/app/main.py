"""Command-line entry point: ``credit-fairness <command> [flags]``."""

import argparse
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from app.clients.storage import ArtifactWriter
from app.commands.audit import run_audit
from app.commands.fpdp import run_fpdp
from app.commands.ingest import run_ingest
from app.commands.mitigate import run_mitigate
from app.commands.report import run_report
from app.commands.train import run_train
from app.core.errors import AuditError
from app.core.logger import logger, setup_logger
from app.core.settings import RunConfig, load_config

COMMANDS: dict[str, tuple[Callable[[RunConfig, ArtifactWriter], Any], str]] = {
    "ingest": (run_ingest, "summarize the dataset and its feature associations"),
    "train": (run_train, "train a scoring model and report PCC/AUC"),
    "audit": (run_audit, "run the five fairness tests"),
    "fpdp": (run_fpdp, "fairness partial dependence curves and candidate variables"),
    "mitigate": (run_mitigate, "mitigation strategies and the fairness/performance trade-off"),
    "report": (run_report, "full pipeline into one output directory"),
}

# flag destination -> RunConfig field
FLAG_FIELDS = {
    "data": "data_path",
    "schema": "schema_path",
    "model": "model_path",
    "preset": "preset",
    "delta": "delta",
    "alpha": "alpha",
    "fpdp_alpha": "fpdp_alpha",
    "classes": "n_classes",
    "gamma": "gamma",
    "seed": "seed",
    "out": "out_dir",
    "with_protected": "include_protected",
    "search_draws": "search_draws",
    "folds": "folds",
    "hypotheses": "hypotheses",
    "features": "features",
    "grid": "grid",
    "grid_points": "grid_points",
    "fair_includes_pe": "fair_includes_pe",
    "log_level": "log_level",
}


def _common_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="JSON run configuration; flags override its fields")
    parser.add_argument("--data", help="German credit file, or CSV together with --schema")
    parser.add_argument("--schema", help="JSON schema sidecar of a CSV dataset")
    parser.add_argument("--model", help="saved model JSON to audit instead of training")
    parser.add_argument("--preset", help="lr, ridge, tree or tree-prime")
    parser.add_argument("--delta", type=float, help="classification threshold")
    parser.add_argument("--alpha", type=float, help="significance level of the audit")
    parser.add_argument("--fpdp-alpha", type=float, help="significance level of sweeps and mitigation")
    parser.add_argument("--classes", type=int, help="number of risk classes")
    parser.add_argument("--gamma", type=float, help="categorical mismatch weight of the clustering")
    parser.add_argument("--seed", type=int, help="root random seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument(
        "--with-protected", action="store_true", default=None, help="train with the protected attribute"
    )
    parser.add_argument("--search-draws", type=int, help="random-search draws instead of preset hyperparameters")
    parser.add_argument("--folds", type=int, help="cross-validation folds of the random search")
    parser.add_argument("--hypotheses", nargs="+", help="hypotheses to sweep (SP CSP EO EOP PE)")
    parser.add_argument("--features", nargs="+", help="features to sweep; defaults to those the model uses")
    parser.add_argument("--grid", help="observed or uniform grid for numeric features")
    parser.add_argument("--grid-points", type=int, help="points of a uniform grid")
    parser.add_argument("--fair-includes-pe", action="store_true", default=None, help="require PE for a fair row")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="credit-fairness", description="Group fairness audit of credit scoring models"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    for name, (_, description) in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=description, description=description)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {field: getattr(args, flag) for flag, field in FLAG_FIELDS.items()}
    try:
        config = load_config(Path(args.config) if args.config else None, overrides)
        setup_logger(config.log_level)
        writer = ArtifactWriter(config.out_dir)
        command, _ = COMMANDS[args.command]
        command(config, writer)
        writer.write_manifest(config, args.command)
    except AuditError as e:
        logger.error("command_failed", command=args.command, error=str(e))
        return 1
    logger.info("command_completed", command=args.command, out_dir=str(config.out_dir))
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
