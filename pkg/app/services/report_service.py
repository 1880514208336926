"""
Report Service
Human-readable and JSON rendering of every command report
"""

import logging
import sys
from typing import Callable, Iterable, List, Optional, TextIO

from pydantic import BaseModel

from app.schemas.reports import (
    BestPathReport,
    ClassificationReport,
    CostReport,
    OracleReport,
    ReproductionReport,
    SpiralSummary,
    StabilityReport,
    SurveyReport,
)

logger = logging.getLogger(__name__)


# ==========================================
# NUMBERS
# ==========================================

def fmt(value) -> str:
    """6 significant digits; lists as tuples; None as '-'"""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (list, tuple)):
        return "(" + ", ".join(fmt(item) for item in value) + ")"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _lines(pairs: Iterable) -> List[str]:
    pairs = list(pairs)
    width = max(len(label) for label, _ in pairs)
    return [f"{label.ljust(width)}  {fmt(value)}" for label, value in pairs]


# ==========================================
# RENDERERS
# ==========================================

def render_stability(report: StabilityReport) -> List[str]:
    lines = _lines([
        ("stable", report.stable),
        ("closed-form stable", report.closed_form_stable),
        ("completely-S", report.completely_s),
        ("P-matrix", report.p_matrix),
        ("R^-1 theta < 0", report.drift_condition),
        ("region", report.region.value),
        ("beta", report.beta),
        ("on boundary", report.on_boundary),
    ])
    if not report.lcp_checked:
        lines.append("  LCP not enumerated")
    for solution in report.lcp_solutions:
        lines.append(f"  LCP {solution.kind.value:<9} support {fmt(solution.support)}  u={fmt(solution.u)}  v={fmt(solution.v)}")
    return lines


def render_spiral(summary: SpiralSummary) -> List[str]:
    return _lines([
        ("orientation", summary.orientation.value),
        ("k*", summary.k_star),
        ("per-turn cost", summary.per_turn_cost),
        ("total cost f(k*)", summary.total_cost),
        ("turns built", summary.truncation_turns),
        ("tail bound", summary.tail_bound),
        ("truncated path cost", summary.path_cost),
    ])


def render_classification(report: ClassificationReport) -> List[str]:
    lines = [f"verdict: {report.verdict.value}", "", "stability:"]
    lines += ["  " + line for line in render_stability(report.stability)]
    lines += [""] + _lines([
        ("condition 1", report.condition1),
        ("condition 1 margin", report.condition1_margin),
        ("dichotomy holds", report.dichotomy_holds),
        ("axis cost to e3", report.axis_cost),
    ])
    lines.append("reflectivity of the axis paths:")
    for item in report.reflectivity:
        lines.append(f"  K={fmt(item.faces)}  rates {fmt(item.vector)}  {'ok' if item.holds else 'fails'}")
    lines.append("alternatives to the axis path:")
    witness = report.witness
    for name, value in witness.alternatives.items():
        lines.append(
            f"  {name}: {fmt(value)} at a={fmt(witness.alternative_argmins.get(name))}"
            f"  probe(0.5)={fmt(witness.probe_costs.get(name))}"
            f"  cheaper={fmt(witness.spiral_condition.get(name))}"
            f"  spiral={fmt(witness.spiral_costs.get(name))}"
        )
    if witness.reason:
        lines.append(f"inconclusive: {witness.reason}")
    if report.spiral is not None:
        lines += ["", "optimal spiral:"] + ["  " + line for line in render_spiral(report.spiral)]
    return lines


def render_cost_report(report: CostReport) -> List[str]:
    lines = [f"from {fmt(report.start)} to {fmt(report.point)}"]
    for entry in report.entries:
        label = entry.family
        if entry.faces:
            label += f" K={fmt(entry.faces)}"
        if entry.via is not None:
            label += f" via F_{entry.via}"
        notes = []
        if entry.provenance.value != "closed_form":
            notes.append(entry.provenance.value)
        if not entry.attained:
            notes.append("lower bound only")
        if entry.reflectivity is not None:
            notes.append(f"rates {fmt(entry.reflectivity)}")
        if entry.argmin is not None:
            notes.append(f"at {fmt(entry.argmin)}")
        lines.append(f"  {label:<28} {fmt(entry.value):>12}  {'  '.join(notes)}".rstrip())
    return lines


def render_best(report: BestPathReport) -> List[str]:
    lines = _lines([
        ("point", report.point),
        ("cost", report.cost),
        ("family", report.family),
        ("segments", len(report.path.get("segments", []))),
    ])
    if report.inconclusive:
        lines.append("warning: gradual-or-spiral dichotomy not guaranteed for these reflection entries")
    return lines


def render_reproduction(report: ReproductionReport) -> List[str]:
    lines = [f"{'quantity':<24} {'quoted':>20} {'computed':>24}  result"]
    for row in report.rows:
        result = "info" if row.passed is None else ("pass" if row.passed else "FAIL")
        lines.append(f"{row.quantity:<24} {fmt(row.quoted):>20} {fmt(row.computed):>24}  {result}")
    lines.append("")
    lines.append("all passed" if report.all_passed else "some checks FAILED")
    return lines


def render_oracle(report: OracleReport) -> List[str]:
    lines = [f"seed {report.seed}, {report.config.samples} samples per check"]
    for check in report.checks:
        note = "  (violations expected)" if check.expected_violations else ""
        lines.append(f"  {check.name:<24} passed {check.passed:>7}  failed {check.failed:>6}  skipped {check.skipped:>6}{note}")
    for violation in report.violations[:10]:
        lines.append(f"  ! {violation.check}: {violation.detail}")
    lines.append(f"violations: {report.violation_count}")
    return lines


def render_survey(report: SurveyReport) -> List[str]:
    return _lines([
        ("grid step", report.step),
        ("stable cells r1 > r2 >= 0", report.stable_cells),
        ("condition 1 holds", report.condition1_cells),
        ("condition 1 fails", len(report.failures)),
    ])


# ==========================================
# OUTPUT
# ==========================================

def emit(
    report: BaseModel,
    as_json: bool,
    renderer: Callable[..., List[str]],
    stream: Optional[TextIO] = None
) -> None:
    """Print a report as full-precision JSON or through its renderer"""
    stream = stream or sys.stdout
    if as_json:
        stream.write(report.model_dump_json(indent=2) + "\n")
    else:
        stream.write("\n".join(renderer(report)) + "\n")


__all__ = [
    "fmt",
    "render_stability",
    "render_spiral",
    "render_classification",
    "render_cost_report",
    "render_best",
    "render_reproduction",
    "render_oracle",
    "render_survey",
    "emit"
]
