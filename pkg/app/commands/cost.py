"""
Cost command
Evaluates one named cost, or every applicable cost, for a query point
"""

import argparse
from typing import Optional

import numpy as np

from app.commands.common import add_output_options, add_problem_options, point_option, problem_from_args, write_json
from app.core.costs import (
    FaceSet,
    attained_cost,
    cost_report,
    direct_cost,
    evaluate_reflected,
    three_piece_gradual,
    two_piece_via_axis,
    two_piece_via_face,
)
from app.core.exceptions import InvalidProblemData
from app.core.geometry import ProblemData
from app.schemas.reports import CostEntry, CostReport
from app.services.report_service import emit, render_cost_report

NAME = "cost"

FAMILIES = ["report", "direct", "reflected", "one-piece", "via-face", "via-axis", "three-piece"]


def add_parser(subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help="evaluate path costs to a point")
    add_problem_options(parser)
    parser.add_argument("--point", nargs=3, type=float, required=True, metavar=("X", "Y", "Z"))
    parser.add_argument("--start", nargs=3, type=float, metavar=("X", "Y", "Z"), help="start point (default origin)")
    parser.add_argument("--family", choices=FAMILIES, default="report")
    parser.add_argument("--faces", help="face set K, e.g. 1,2")
    parser.add_argument("--via", type=int, choices=[1, 2, 3], help="face i the path ends on")
    add_output_options(parser, "also write the JSON report here")
    return parser


def _require_via(via: Optional[int], family: str) -> int:
    if via is None:
        raise InvalidProblemData(f"--family {family} needs --via")
    return via


def _entry(family: str, faces: FaceSet, v: np.ndarray, w: np.ndarray, via: Optional[int], data: ProblemData) -> CostEntry:
    if family == "direct":
        return CostEntry(family="direct", value=direct_cost(w, v, data))

    if family in ("reflected", "one-piece"):
        value = evaluate_reflected(faces, w, v, data) if family == "reflected" else attained_cost(faces, w, v, data)
        return CostEntry(
            family=family.replace("-", "_"),
            faces=list(faces.indices),
            value=value.value,
            provenance=value.provenance,
            attained=value.attained,
            reflectivity=None if value.reflectivity is None else value.reflectivity.tolist()
        )

    if np.any(w):
        raise InvalidProblemData(f"--family {family} starts at the origin; drop --start")
    if family == "via-face":
        search = two_piece_via_face(faces, v, data)
    elif family == "via-axis":
        search = two_piece_via_axis(faces, _require_via(via, family), v, data)
    else:
        search = three_piece_gradual(faces, _require_via(via, family), v, data)
    return CostEntry(
        family=family.replace("-", "_"),
        faces=list(faces.indices),
        via=via,
        value=search.value,
        argmin=search.argmin.tolist()
    )


def run(args: argparse.Namespace) -> int:
    data = problem_from_args(args)
    v = point_option(args.point, "point")
    w = point_option(args.start, "start")
    if args.family == "report":
        report = cost_report(data, v, w)
    else:
        w = np.zeros(3) if w is None else w
        entry = _entry(args.family, FaceSet.parse(args.faces), v, w, args.via, data)
        report = CostReport(point=v.tolist(), start=w.tolist(), entries=[entry])
    emit(report, args.json, render_cost_report)
    if args.output is not None:
        write_json(args.output, report.model_dump(mode="json"))
    return 0
