"""
Regulation Paths
Piecewise-linear (x, y, z) triples: Skorohod validation, cost and the scale/rotate/merge maps
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import InvalidProblemData, PathValidationError
from app.core.geometry import ProblemData, as_point, is_rotationally_symmetric, row_norms, rotate_vector
from app.schemas.path import PathPayload, SegmentPayload
from app.schemas.reports import ValidationReport, Violation

logger = logging.getLogger(__name__)


# ==========================================
# VALUE TYPES
# ==========================================

def _vector(values: Any) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Segment:
    """Constant-rate piece: z moves from z_start at rate zdot for ``duration``"""
    duration: float
    xdot: np.ndarray
    ydot: np.ndarray
    zdot: np.ndarray
    z_start: np.ndarray

    def __post_init__(self):
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise PathValidationError(f"segment duration must be > 0, got {self.duration}")
        for name in ("xdot", "ydot", "zdot", "z_start"):
            object.__setattr__(self, name, _vector(getattr(self, name)))

    @property
    def end(self) -> np.ndarray:
        return self.z_start + self.duration * self.zdot

    @property
    def displacement(self) -> np.ndarray:
        return self.duration * self.zdot


@dataclass(frozen=True, eq=False)
class RegulationTriple:
    origin: np.ndarray
    segments: Tuple[Segment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "origin", _vector(self.origin))
        object.__setattr__(self, "segments", tuple(self.segments))

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def endpoint(self) -> np.ndarray:
        return self.segments[-1].end if self.segments else self.origin

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))


def empty_path(origin: Sequence[float]) -> RegulationTriple:
    return RegulationTriple(origin=as_point(origin, "origin"))


def segment_from_rates(
    z_start: np.ndarray,
    duration: float,
    xdot: np.ndarray,
    ydot: np.ndarray,
    data: ProblemData
) -> Segment:
    """Build a segment with zdot = xdot + R ydot"""
    xdot = np.asarray(xdot, dtype=float)
    ydot = np.asarray(ydot, dtype=float)
    return Segment(
        duration=float(duration),
        xdot=xdot,
        ydot=ydot,
        zdot=xdot + data.r @ ydot,
        z_start=np.asarray(z_start, dtype=float)
    )


# ==========================================
# VALIDATION
# ==========================================

def validate_triple(path: RegulationTriple, data: ProblemData) -> ValidationReport:
    """
    Check the Skorohod conditions segment by segment

    Conditions: continuity, state equation zdot = xdot + R ydot,
    nonnegativity of z, nondecreasing y, and complementarity
    (ydot_j > 0 only while z_j = 0). Violations are collected, never raised.
    """
    pos_tol = settings.POSITION_ATOL
    rate_tol = settings.RATE_ATOL
    violations: List[Violation] = []

    def flag(index: int, condition: str, detail: str) -> None:
        violations.append(Violation(segment=index, condition=condition, detail=detail))

    if np.any(path.origin < -pos_tol):
        flag(-1, "nonnegativity", f"origin {path.origin.tolist()} leaves the octant")

    previous_end = path.origin
    for index, segment in enumerate(path.segments):
        scale = max(1.0, float(np.max(np.abs(segment.z_start))), float(np.max(np.abs(segment.end))))
        rate_scale = max(1.0, float(np.max(np.abs(segment.xdot))), float(np.max(np.abs(segment.ydot))))

        gap = float(np.max(np.abs(segment.z_start - previous_end)))
        if gap > pos_tol * scale:
            flag(index, "continuity", f"z_start is {gap:.3e} from the previous endpoint")

        residual = float(np.max(np.abs(segment.zdot - segment.xdot - data.r @ segment.ydot)))
        if residual > rate_tol * rate_scale:
            flag(index, "state_equation", f"|zdot - xdot - R ydot| = {residual:.3e}")

        if np.any(segment.z_start < -pos_tol * scale) or np.any(segment.end < -pos_tol * scale):
            flag(index, "nonnegativity", f"segment leaves the octant: {segment.z_start.tolist()} -> {segment.end.tolist()}")

        if np.any(segment.ydot < -rate_tol * rate_scale):
            flag(index, "monotone_push", f"negative pushing rate {segment.ydot.tolist()}")

        for j in np.flatnonzero(segment.ydot > rate_tol * rate_scale):
            if abs(segment.z_start[j]) > pos_tol * scale or abs(segment.zdot[j]) > rate_tol * rate_scale:
                flag(index, "complementarity", f"ydot[{j + 1}] > 0 while z[{j + 1}] is off its face")

        previous_end = segment.end

    return ValidationReport(valid=not violations, violations=violations)


def require_valid(path: RegulationTriple, data: ProblemData) -> RegulationTriple:
    report = validate_triple(path, data)
    if not report.valid:
        first = report.first
        raise PathValidationError(
            f"invalid regulation triple: {first.condition} at segment {first.segment}",
            report
        )
    return path


# ==========================================
# COST
# ==========================================

def path_cost(path: RegulationTriple, data: ProblemData, validate: bool = True) -> float:
    """Sum over segments of 1/2 ||xdot - theta||^2 T"""
    if validate:
        require_valid(path, data)
    if not path.segments:
        return 0.0
    deviations = np.array([s.xdot - data.theta for s in path.segments])
    durations = np.array([s.duration for s in path.segments])
    return float(0.5 * np.sum(row_norms(deviations, data) ** 2 * durations))


# ==========================================
# TRANSFORMATIONS
# ==========================================

def scale_path(path: RegulationTriple, k: float) -> RegulationTriple:
    """Positions and durations times k, rates unchanged"""
    if not k > 0:
        raise InvalidProblemData(f"scale factor must be > 0, got {k}")
    return RegulationTriple(
        origin=path.origin * k,
        segments=[
            Segment(
                duration=s.duration * k,
                xdot=s.xdot,
                ydot=s.ydot,
                zdot=s.zdot,
                z_start=s.z_start * k
            )
            for s in path.segments
        ]
    )


def rotate_path(path: RegulationTriple, shift: int, data: ProblemData) -> RegulationTriple:
    """
    Cyclic coordinate permutation of every vector

    shift 1 sends (a,b,c) to (b,c,a); shift 2 sends it to (c,a,b).
    Cost is preserved because data is rotationally symmetric.

    Raises:
        InvalidProblemData: bad shift, or data not rotationally symmetric
    """
    if shift not in (1, 2):
        raise InvalidProblemData(f"rotation shift must be 1 or 2, got {shift}")
    if not is_rotationally_symmetric(data):
        raise InvalidProblemData(
            "rotating a path needs rotationally symmetric data",
            {"theta": data.theta.tolist(), "r": data.r.tolist()}
        )
    return RegulationTriple(
        origin=rotate_vector(path.origin, shift),
        segments=[
            Segment(
                duration=s.duration,
                xdot=rotate_vector(s.xdot, shift),
                ydot=rotate_vector(s.ydot, shift),
                zdot=rotate_vector(s.zdot, shift),
                z_start=rotate_vector(s.z_start, shift)
            )
            for s in path.segments
        ]
    )


def merge_paths(first: RegulationTriple, second: RegulationTriple) -> RegulationTriple:
    """Concatenate two paths whose endpoint/origin coincide"""
    gap = float(np.max(np.abs(first.endpoint - second.origin)))
    scale = max(1.0, float(np.max(np.abs(first.endpoint))))
    if gap > settings.POSITION_ATOL * scale:
        raise InvalidProblemData(
            "cannot merge paths: endpoint does not match origin",
            {"endpoint": first.endpoint.tolist(), "origin": second.origin.tolist(), "gap": gap}
        )
    return RegulationTriple(origin=first.origin, segments=first.segments + second.segments)


# ==========================================
# JSON
# ==========================================

def path_to_json(path: RegulationTriple) -> Dict[str, Any]:
    payload = PathPayload(
        origin=path.origin.tolist(),
        segments=[
            SegmentPayload(T=s.duration, xdot=s.xdot.tolist(), ydot=s.ydot.tolist())
            for s in path.segments
        ]
    )
    return payload.model_dump()


def path_from_json(payload: Dict[str, Any], data: ProblemData) -> RegulationTriple:
    """Rebuild a triple; zdot from the state equation, z_start by continuity"""
    try:
        parsed = PathPayload.model_validate(payload)
    except ValidationError as exc:
        raise InvalidProblemData("Invalid path JSON", {"errors": exc.errors(include_url=False)}) from exc

    z = np.array(parsed.origin, dtype=float)
    segments: List[Segment] = []
    for item in parsed.segments:
        segment = segment_from_rates(z, item.T, np.array(item.xdot), np.array(item.ydot), data)
        segments.append(segment)
        z = segment.end
    return RegulationTriple(origin=np.array(parsed.origin), segments=segments)


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "Segment",
    "RegulationTriple",
    "empty_path",
    "segment_from_rates",
    "validate_triple",
    "require_valid",
    "path_cost",
    "scale_path",
    "rotate_path",
    "merge_paths",
    "path_to_json",
    "path_from_json"
]
