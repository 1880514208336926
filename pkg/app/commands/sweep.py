"""
Sweep command
Phase-diagram CSV over a grid of (r1, r2)
"""

import argparse
import logging
from pathlib import Path

from pydantic import ValidationError

from app.core.exceptions import InvalidProblemData
from app.schemas.reports import SweepSpec
from app.services.sweep_service import run_sweep, write_sweep_csv

logger = logging.getLogger(__name__)

NAME = "sweep"


def add_parser(subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help="sweep the (r1, r2) plane into a CSV")
    parser.add_argument("--r1-range", nargs=3, type=float, required=True, metavar=("MIN", "MAX", "STEPS"))
    parser.add_argument("--r2-range", nargs=3, type=float, required=True, metavar=("MIN", "MAX", "STEPS"))
    parser.add_argument("--theta0", type=float, default=-1.0)
    parser.add_argument("--output", type=Path, required=True)
    return parser


def _range(values, name: str):
    low, high, steps = values
    if steps != int(steps):
        raise InvalidProblemData(f"{name} steps must be an integer, got {steps}")
    return (low, high, int(steps))


def spec_from_args(args: argparse.Namespace) -> SweepSpec:
    try:
        return SweepSpec(
            r1_range=_range(args.r1_range, "--r1-range"),
            r2_range=_range(args.r2_range, "--r2-range"),
            theta0=args.theta0,
            output=str(args.output)
        )
    except ValidationError as exc:
        raise InvalidProblemData("Invalid sweep specification", {"errors": exc.errors(include_url=False)}) from exc


def run(args: argparse.Namespace) -> int:
    spec = spec_from_args(args)
    frame = run_sweep(spec)
    write_sweep_csv(frame, Path(spec.output))
    logger.info("%d rows written to %s", len(frame), spec.output)
    return 0
