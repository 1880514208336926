"""
Validate command
Seeded lemma suite, with an optional Condition 1 survey
"""

import argparse
import logging
import sys

from pydantic import ValidationError

from app.commands.common import write_json
from app.core.config import settings
from app.core.exceptions import UsageError, ValidationFailure
from app.core.oracle import condition1_survey, lemma_suite
from app.schemas.reports import OracleConfig
from app.services.report_service import emit, render_oracle, render_survey

logger = logging.getLogger(__name__)

NAME = "validate"


def add_parser(subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help="run the randomized inequality suite")
    parser.add_argument("--seed", type=int, default=settings.ORACLE_SEED)
    parser.add_argument("--samples", type=int, default=settings.ORACLE_SAMPLES)
    parser.add_argument("--equivalence-samples", type=int, default=settings.ORACLE_EQUIVALENCE_SAMPLES)
    parser.add_argument("--grid-resolution", type=int, default=settings.ORACLE_GRID_RESOLUTION)
    parser.add_argument("--tolerance", type=float, default=settings.ORACLE_TOLERANCE)
    parser.add_argument("--adversarial", action="store_true", help="add checks whose hypotheses are violated")
    parser.add_argument("--survey", type=float, metavar="STEP", help="also survey Condition 1 on a grid")
    parser.add_argument("--json", action="store_true")
    parser.add_argument("--output", help="write the JSON report here")
    return parser


def config_from_args(args: argparse.Namespace) -> OracleConfig:
    try:
        return OracleConfig(
            seed=args.seed,
            samples=args.samples,
            equivalence_samples=args.equivalence_samples,
            grid_resolution=args.grid_resolution,
            tolerance=args.tolerance,
            adversarial=args.adversarial
        )
    except ValidationError as exc:
        raise UsageError("Invalid validation options", {"errors": exc.errors(include_url=False)}) from exc


def run(args: argparse.Namespace) -> int:
    """Exit 0 iff no unexpected violations; violations raise ValidationFailure (exit 3)"""
    cfg = config_from_args(args)
    report = lemma_suite(cfg)
    emit(report, args.json, render_oracle)
    if args.output is not None:
        write_json(args.output, report.model_dump(mode="json"))

    if args.survey is not None:
        emit(condition1_survey(args.survey), args.json, render_survey)

    if report.violation_count:
        sys.stdout.flush()
        expected = {check.name for check in report.checks if check.expected_violations}
        raise ValidationFailure(
            f"{report.violation_count} violations",
            {"violations": [v.model_dump() for v in report.violations if v.check not in expected]}
        )
    return 0
