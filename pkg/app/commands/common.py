"""
Shared command options
Problem-data flags, point parsing and JSON file helpers used by every command
"""

import argparse
import json
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from app.core.exceptions import InvalidProblemData
from app.core.geometry import ProblemData, as_point, load_problem, rs_problem
from app.schemas.problem import RsParams


# ==========================================
# PROBLEM OPTIONS
# ==========================================

def add_problem_options(parser: argparse.ArgumentParser, defaults: Optional[RsParams] = None) -> None:
    """--theta0 --r1 --r2 --sigma2 --rho, or --input <json>"""
    group = parser.add_argument_group("problem data")
    group.add_argument("--theta0", type=float, default=defaults.theta0 if defaults else None)
    group.add_argument("--r1", type=float, default=defaults.r1 if defaults else None)
    group.add_argument("--r2", type=float, default=defaults.r2 if defaults else None)
    group.add_argument("--sigma2", type=float, default=1.0)
    group.add_argument("--rho", type=float, default=0.0)
    group.add_argument("--input", type=Path, help="problem JSON (RS or general form)")


def add_output_options(parser: argparse.ArgumentParser, output_help: str = "write the report here") -> None:
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--output", type=Path, help=output_help)


def read_json(path: Path) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidProblemData(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidProblemData(f"{path} is not valid JSON: {exc.msg}") from exc


def write_json(path: Path, payload: Any) -> None:
    try:
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")
    except OSError as exc:
        raise InvalidProblemData(f"cannot write {path}: {exc.strerror}") from exc


def params_from_args(args: argparse.Namespace) -> RsParams:
    """RS parameters from --input (RS form) or the flags"""
    if args.input is not None:
        payload = read_json(args.input)
        if "theta0" not in payload:
            raise InvalidProblemData("this command needs the RS problem form (theta0, r1, r2, sigma2, rho)")
        raw = payload
    else:
        missing = [name for name in ("theta0", "r1", "r2") if getattr(args, name) is None]
        if missing:
            raise InvalidProblemData(f"missing problem data: {', '.join('--' + name for name in missing)}")
        raw = {"theta0": args.theta0, "r1": args.r1, "r2": args.r2, "sigma2": args.sigma2, "rho": args.rho}
    try:
        return RsParams.model_validate(raw)
    except ValidationError as exc:
        raise InvalidProblemData("Invalid problem data", {"errors": exc.errors(include_url=False)}) from exc


def problem_from_args(args: argparse.Namespace) -> ProblemData:
    """Either problem form; general (theta, Gamma, R) only through --input"""
    if args.input is not None:
        return load_problem(read_json(args.input))
    return rs_problem(params_from_args(args))


def point_option(values: Optional[Sequence[float]], name: str) -> Optional[np.ndarray]:
    return None if values is None else as_point(values, name)


__all__ = [
    "add_problem_options",
    "add_output_options",
    "read_json",
    "write_json",
    "params_from_args",
    "problem_from_args",
    "point_option"
]
