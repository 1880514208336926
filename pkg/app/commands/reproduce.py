"""
Reproduce command
Worked-example quantities, quoted vs computed
"""

import argparse

from app.commands.common import add_output_options, add_problem_options, params_from_args, write_json
from app.services.reproduce_service import CANONICAL, reproduce
from app.services.report_service import emit, render_reproduction

NAME = "reproduce"


def add_parser(subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help="reproduce the worked example (theta0=-1, r1=1.5, r2=0)")
    add_problem_options(parser, defaults=CANONICAL)
    add_output_options(parser, "also write the JSON report here")
    return parser


def run(args: argparse.Namespace) -> int:
    """Exit 0 iff every checked row passes"""
    report = reproduce(params_from_args(args))
    emit(report, args.json, render_reproduction)
    if args.output is not None:
        write_json(args.output, report.model_dump(mode="json"))
    return 0 if report.all_passed else 1
