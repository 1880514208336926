"""
Best command
Cheapest path to a terminal point, optionally written as path JSON
"""

import argparse
import logging

from app.commands.common import add_output_options, add_problem_options, params_from_args, point_option, write_json
from app.core.solver import best_cost_to_point, best_gradual_cost
from app.services.report_service import emit, render_best

logger = logging.getLogger(__name__)

NAME = "best"


def add_parser(subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help="cheapest path from the origin to a point")
    add_problem_options(parser)
    parser.add_argument("--point", nargs=3, type=float, required=True, metavar=("X", "Y", "Z"))
    parser.add_argument("--gradual", action="store_true", help="price axis prefixes without spirals")
    add_output_options(parser, "write the optimal path JSON here")
    return parser


def run(args: argparse.Namespace) -> int:
    params = params_from_args(args)
    v = point_option(args.point, "point")
    best = best_gradual_cost(params, v) if args.gradual else best_cost_to_point(params, v)
    emit(best.to_report(v), args.json, render_best)
    if args.output is not None:
        write_json(args.output, best.to_report(v).path)
        logger.info("path written to %s", args.output)
    return 0
