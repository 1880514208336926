"""
Spiral command
Optimizes one classic-spiral orientation and optionally writes its truncated path
"""

import argparse
import logging

from app.commands.common import add_output_options, add_problem_options, params_from_args, write_json
from app.core.paths import path_to_json
from app.core.solver import evaluate_spiral, optimize_spiral
from app.schemas.reports import Orientation
from app.services.report_service import emit, render_spiral

logger = logging.getLogger(__name__)

NAME = "spiral"


def add_parser(subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help="optimize a classic spiral")
    add_problem_options(parser)
    parser.add_argument(
        "--orientation",
        choices=[o.value for o in Orientation],
        default=Orientation.VIA_F2.value
    )
    parser.add_argument("--turns", type=int, help="turns to build (default: until the tail is negligible)")
    parser.add_argument("--k", type=float, help="evaluate this shrink factor instead of optimizing")
    add_output_options(parser, "write the truncated spiral path JSON here")
    return parser


def run(args: argparse.Namespace) -> int:
    params = params_from_args(args)
    orientation = Orientation(args.orientation)
    if args.k is None:
        solution = optimize_spiral(params, orientation, turns=args.turns)
    else:
        solution = evaluate_spiral(params, orientation, args.k, turns=args.turns)

    emit(solution.summary(), args.json, render_spiral)
    if args.output is not None:
        write_json(args.output, path_to_json(solution.truncated_path))
        logger.info("spiral path written to %s", args.output)
    return 0
