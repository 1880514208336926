"""
Classify command
Stability, Condition 1 and the gradual-vs-spiral verdict for one parameter set
"""

import argparse
import logging

from app.commands.common import add_output_options, add_problem_options, params_from_args, write_json
from app.core.solver import classify_optimal_path
from app.schemas.reports import Verdict
from app.services.report_service import emit, render_classification

logger = logging.getLogger(__name__)

NAME = "classify"
EXIT_INCONCLUSIVE = 2


def add_parser(subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help="classify the optimal path for RS data")
    add_problem_options(parser)
    add_output_options(parser, "also write the JSON report here")
    return parser


def run(args: argparse.Namespace) -> int:
    """Exit 0 on a verdict, 2 when the verdict is Inconclusive"""
    params = params_from_args(args)
    report = classify_optimal_path(params).to_report()
    emit(report, args.json, render_classification)
    if args.output is not None:
        write_json(args.output, report.model_dump(mode="json"))
        logger.info("classification written to %s", args.output)
    return EXIT_INCONCLUSIVE if report.verdict == Verdict.INCONCLUSIVE else 0
