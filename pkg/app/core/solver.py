"""
Optimal Path Solver
Condition 1, spiral shrink-factor optimization, gradual-vs-spiral classification and best paths
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.costs import (
    FaceSet,
    axis_unit_cost,
    direct_cost,
    one_piece_costs,
    optimal_segment,
    reflectivity_check,
    three_piece_gradual,
    two_piece_via_axis,
    unit,
)
from app.core.exceptions import (
    InvalidProblemData,
    SpiralDegenerateError,
    UnstableDataError,
    UnsupportedCovarianceError,
)
from app.core.geometry import ProblemData, as_point, rs_problem
from app.core.minimize import scan_then_golden
from app.core.paths import (
    RegulationTriple,
    empty_path,
    merge_paths,
    path_cost,
    path_to_json,
    require_valid,
    rotate_path,
    scale_path,
)
from app.core.stability import classify_stability
from app.schemas.problem import RsParams
from app.schemas.reports import (
    BestPathReport,
    ClassificationReport,
    Orientation,
    ReflectivityResult,
    SpiralSummary,
    StabilityReport,
    Verdict,
    WitnessRecord,
)

logger = logging.getLogger(__name__)


# ==========================================
# ORIENTATIONS
# ==========================================

@dataclass(frozen=True)
class _Turn:
    """Repeated face segment of a spiral arriving at e3"""
    face: int
    previous_axis: int
    shift: int
    axes: Tuple[int, int]


_TURNS: Dict[Orientation, _Turn] = {
    # k e1 -> e3 across F_2; turns cycle e3 <- k e1 <- k^2 e2 <- ...
    Orientation.VIA_F2: _Turn(face=2, previous_axis=1, shift=2, axes=(2, 3)),
    # k e2 -> e3 across F_1; the mirrored cycle
    Orientation.VIA_F1: _Turn(face=1, previous_axis=2, shift=1, axes=(1, 3)),
}

_AXIS_SHIFT = {3: 0, 2: 1, 1: 2}


def _rotated(path: RegulationTriple, shift: int, data: ProblemData) -> RegulationTriple:
    shift %= 3
    return path if shift == 0 else rotate_path(path, shift, data)


# ==========================================
# CONDITION 1
# ==========================================

def condition1_margin(r1: float, r2: float) -> float:
    """LHS - RHS of the Condition 1 inequality"""
    lhs = (1.0 + r2 ** 2) * (1.0 + r1 ** 2 - r2 - r1 * r2) ** 2
    rhs = 2.0 * (r1 * r2) ** 2 * (1.0 + r1 ** 2 + r2 ** 2 - r1 - r2 - r1 * r2)
    return lhs - rhs


def condition1(r1: float, r2: float) -> bool:
    """
    (r1, r2) in R_f = {r1, r2 >= 0, r1 > r2, -1 < r1 + r2 < 2} and the margin is >= 0

    Example:
        >>> condition1(1.5, 0.0)
        True
        >>> condition1(0.5, 0.5)
        False
    """
    in_region = r1 >= 0 and r2 >= 0 and r1 > r2 and -1.0 < r1 + r2 < 2.0
    return bool(in_region and condition1_margin(r1, r2) >= 0)


def dichotomy_holds(r1: float, r2: float) -> bool:
    """Nonnegative off-diagonals and either r1 <= r2 or Condition 1"""
    return r1 >= 0 and r2 >= 0 and (r1 <= r2 or condition1(r1, r2))


# ==========================================
# PRECONDITIONS
# ==========================================

def _checked_problem(params: RsParams) -> Tuple[ProblemData, StabilityReport]:
    if not params.identity_covariance:
        raise UnsupportedCovarianceError(
            "classification requires Gamma = I (sigma2 = 1, rho = 0)",
            {"sigma2": params.sigma2, "rho": params.rho}
        )
    stability = classify_stability(params)
    if not stability.stable:
        raise UnstableDataError(
            "VP unbounded-time regime not classified: data is not stable",
            {"theta0": params.theta0, "r1": params.r1, "r2": params.r2}
        )
    return rs_problem(params), stability


# ==========================================
# SPIRAL
# ==========================================

@dataclass(frozen=True, eq=False)
class SpiralSolution:
    orientation: Orientation
    k_star: float
    per_turn_cost: float
    total_cost: float
    truncated_path: RegulationTriple
    truncation_turns: int
    tail_bound: float
    path_cost: float

    def summary(self) -> SpiralSummary:
        return SpiralSummary(
            orientation=self.orientation,
            k_star=self.k_star,
            per_turn_cost=self.per_turn_cost,
            total_cost=self.total_cost,
            truncation_turns=self.truncation_turns,
            tail_bound=self.tail_bound,
            path_cost=self.path_cost
        )


def _spiral_values(data: ProblemData, orientation: Orientation, k: np.ndarray) -> np.ndarray:
    turn = _TURNS[orientation]
    k = np.atleast_1d(np.asarray(k, dtype=float))
    displacements = unit(3)[None, :] - k[:, None] * unit(turn.previous_axis)[None, :]
    per_turn = one_piece_costs(data, FaceSet.of(turn.face), displacements)[0]
    return per_turn / (1.0 - k)


def spiral_objective(params: RsParams, orientation: Orientation, k: np.ndarray) -> np.ndarray:
    """f(k) = (one-piece face cost from k e_prev to e3) / (1 - k), vectorized over k"""
    return _spiral_values(rs_problem(params), orientation, k)


def _truncation_turns(k: float, total: float) -> int:
    if total <= settings.SPIRAL_TAIL_TOL:
        return 1
    turns = math.ceil(math.log(settings.SPIRAL_TAIL_TOL / total) / math.log(k))
    return int(min(max(turns, 1), settings.SPIRAL_MAX_TURNS))


def _spiral_path(data: ProblemData, orientation: Orientation, k: float, turns: int) -> RegulationTriple:
    turn = _TURNS[orientation]
    base = optimal_segment(FaceSet.of(turn.face), k * unit(turn.previous_axis), unit(3), data)

    # innermost turn first
    pieces = [scale_path(_rotated(base, turn.shift * j, data), k ** j) for j in reversed(range(turns))]
    stub = optimal_segment(FaceSet(), np.zeros(3), pieces[0].origin, data)
    path = stub
    for piece in pieces:
        path = merge_paths(path, piece)
    return path


def build_spiral_path(params: RsParams, orientation: Orientation, k: float, turns: int) -> RegulationTriple:
    """
    Truncated classic spiral to e3 with shrink factor k

    ``turns`` rotated, k-scaled copies of the face segment, preceded by a
    direct stub from the origin to the innermost axis point.
    """
    if not 0.0 < k < 1.0:
        raise InvalidProblemData(f"shrink factor must lie in (0, 1), got {k}")
    if turns < 1:
        raise InvalidProblemData(f"turns must be >= 1, got {turns}")
    data, _ = _checked_problem(params)
    return require_valid(_spiral_path(data, orientation, k, turns), data)


def _optimize_spiral(data: ProblemData, orientation: Orientation, turns: Optional[int] = None) -> SpiralSolution:
    edge = 1e-4
    grid = np.linspace(edge, 1.0 - edge, settings.SPIRAL_SCAN_POINTS)
    result = scan_then_golden(
        lambda k: _spiral_values(data, orientation, k),
        edge,
        1.0 - edge,
        tol=settings.GOLDEN_TOL,
        grid=grid
    )
    if result.at_lower_edge:
        raise SpiralDegenerateError(
            f"spiral degenerates along {orientation.value}: f has no interior minimizer",
            {"orientation": orientation.value, "f_at_edge": result.value}
        )

    k = float(result.x[0])
    logger.debug("spiral %s: k*=%.10f total=%.10f", orientation.value, k, result.value)
    return _spiral_solution(data, orientation, k, result.value, turns)


def _spiral_solution(
    data: ProblemData,
    orientation: Orientation,
    k: float,
    total: float,
    turns: Optional[int]
) -> SpiralSolution:
    if turns is not None and turns < 1:
        raise InvalidProblemData(f"turns must be >= 1, got {turns}")
    per_turn = total * (1.0 - k)
    n = turns or _truncation_turns(k, total)
    path = require_valid(_spiral_path(data, orientation, k, n), data)
    stub = direct_cost(np.zeros(3), unit(3), data)
    return SpiralSolution(
        orientation=orientation,
        k_star=k,
        per_turn_cost=per_turn,
        total_cost=total,
        truncated_path=path,
        truncation_turns=n,
        tail_bound=k ** n * (stub + total),
        path_cost=path_cost(path, data, validate=False)
    )


def optimize_spiral(params: RsParams, orientation: Orientation, turns: Optional[int] = None) -> SpiralSolution:
    """
    Minimize the spiral cost f(k) on (0, 1) and build the truncated spiral

    Args:
        turns: number of turns to build (default: enough for a tail below SPIRAL_TAIL_TOL)

    Raises:
        SpiralDegenerateError: the scan minimum sits at the lower edge of (0, 1)
    """
    data, _ = _checked_problem(params)
    return _optimize_spiral(data, orientation, turns)


def evaluate_spiral(params: RsParams, orientation: Orientation, k: float, turns: Optional[int] = None) -> SpiralSolution:
    """optimize_spiral at a fixed shrink factor k instead of the minimizer"""
    if not 0.0 < k < 1.0:
        raise InvalidProblemData(f"shrink factor must lie in (0, 1), got {k}")
    data, _ = _checked_problem(params)
    total = float(_spiral_values(data, orientation, np.array([k]))[0])
    return _spiral_solution(data, orientation, k, total, turns)


# ==========================================
# CLASSIFICATION
# ==========================================

@dataclass(frozen=True, eq=False)
class Classification:
    params: RsParams
    stability: StabilityReport
    condition1: bool
    condition1_margin: Optional[float]
    dichotomy_holds: bool
    reflectivity: List[ReflectivityResult]
    axis_cost: float
    spiral: Optional[SpiralSolution]
    verdict: Verdict
    witness: WitnessRecord

    def to_report(self) -> ClassificationReport:
        return ClassificationReport(
            params=self.params.model_dump(),
            stability=self.stability,
            condition1=self.condition1,
            condition1_margin=self.condition1_margin,
            dichotomy_holds=self.dichotomy_holds,
            reflectivity=self.reflectivity,
            axis_cost=self.axis_cost,
            spiral=self.spiral.summary() if self.spiral else None,
            verdict=self.verdict,
            witness=self.witness
        )


def _axis_reflectivity(data: ProblemData) -> List[ReflectivityResult]:
    results = []
    for axis in (3, 1, 2):
        faces = FaceSet(tuple(j for j in (1, 2, 3) if j != axis))
        vector, holds = reflectivity_check(faces, unit(axis), data)
        results.append(ReflectivityResult(faces=list(faces.indices), vector=vector.tolist(), holds=holds))
    return results


def probe_cost(data: ProblemData, orientation: Orientation, a: float) -> float:
    """Axis cost to a e_prev plus the face leg from there to e3"""
    turn = _TURNS[orientation]
    leg = one_piece_costs(data, FaceSet.of(turn.face), unit(3) - a * unit(turn.previous_axis))[0][0]
    return a * axis_unit_cost(data, turn.previous_axis) + float(leg)


def classify_optimal_path(params: RsParams) -> Classification:
    """
    Decide between a gradual and a classic spiral optimal path

    Steps: stability and Condition 1, reflectivity of the axis paths, then
    the axis cost to e3 against the two axis-then-face alternatives. A
    cheaper alternative triggers the spiral optimization for that side.

    Raises:
        UnstableDataError: data is not stable
        UnsupportedCovarianceError: Gamma != I
    """
    data, stability = _checked_problem(params)
    r1, r2 = params.r1, params.r2
    holds = dichotomy_holds(r1, r2)
    axis_cost = axis_unit_cost(data, 3)
    scale = max(1.0, abs(axis_cost))

    witness = WitnessRecord(axis_cost=axis_cost)
    spirals: List[SpiralSolution] = []
    unresolved: List[str] = []
    for orientation, turn in _TURNS.items():
        search = two_piece_via_axis(FaceSet(turn.axes), turn.face, unit(3), data)
        witness.alternatives[orientation.value] = search.value
        witness.alternative_argmins[orientation.value] = float(search.argmin[turn.previous_axis - 1])
        witness.probe_costs[orientation.value] = probe_cost(data, orientation, 0.5)
        triggered = axis_cost - search.value > settings.RATE_ATOL * scale
        witness.spiral_condition[orientation.value] = triggered
        witness.spiral_costs[orientation.value] = None
        if not triggered:
            continue
        try:
            spiral = _optimize_spiral(data, orientation)
        except SpiralDegenerateError as exc:
            logger.warning("%s despite a cheaper alternative", exc.message)
            unresolved.append(f"{orientation.value}: {exc.message}")
            continue
        witness.spiral_costs[orientation.value] = spiral.total_cost
        if spiral.total_cost < axis_cost - settings.RATE_ATOL * scale:
            spirals.append(spiral)
        else:
            unresolved.append(f"{orientation.value}: spiral cost {spiral.total_cost:.6g} does not beat the axis")

    best = min(spirals, key=lambda s: s.total_cost) if spirals else None

    if not holds:
        verdict = Verdict.INCONCLUSIVE
        witness.reason = "outside the region where the gradual/spiral dichotomy is proven"
    elif best is not None:
        verdict = Verdict.SPIRAL_OPTIMAL
    elif unresolved:
        verdict = Verdict.INCONCLUSIVE
        witness.reason = "cheaper alternative found but no valid spiral: " + "; ".join(unresolved)
    else:
        verdict = Verdict.GRADUAL_OPTIMAL
    logger.info("classified %s: %s", params, verdict.value)

    ordered = (max(r1, r2), min(r1, r2))
    return Classification(
        params=params,
        stability=stability,
        condition1=condition1(r1, r2),
        condition1_margin=condition1_margin(*ordered) if min(r1, r2) >= 0 else None,
        dichotomy_holds=holds,
        reflectivity=_axis_reflectivity(data),
        axis_cost=axis_cost,
        spiral=best,
        verdict=verdict,
        witness=witness
    )


# ==========================================
# BEST PATHS
# ==========================================

@dataclass(frozen=True, eq=False)
class BestPath:
    cost: float
    path: RegulationTriple
    family: str
    inconclusive: bool = False

    def to_report(self, point: np.ndarray) -> BestPathReport:
        return BestPathReport(
            point=np.asarray(point, dtype=float).tolist(),
            cost=self.cost,
            family=self.family,
            inconclusive=self.inconclusive,
            path=path_to_json(self.path)
        )


@dataclass(frozen=True, eq=False)
class _AxisPricing:
    rate: float
    spiral: Optional[SpiralSolution] = None

    def prefix(self, data: ProblemData, axis: int, t: float) -> RegulationTriple:
        """Path from the origin to t e_axis"""
        if t <= 0:
            return empty_path(np.zeros(3))
        if self.spiral is None:
            faces = FaceSet(tuple(j for j in (1, 2, 3) if j != axis))
            return optimal_segment(faces, np.zeros(3), t * unit(axis), data)
        return scale_path(_rotated(self.spiral.truncated_path, _AXIS_SHIFT[axis], data), t)

    @property
    def label(self) -> str:
        return "spiral" if self.spiral is not None else "axis"


def _spiral_pricing(data: ProblemData) -> _AxisPricing:
    axis_cost = axis_unit_cost(data, 3)
    best: Optional[SpiralSolution] = None
    for orientation in _TURNS:
        try:
            spiral = _optimize_spiral(data, orientation)
        except SpiralDegenerateError:
            continue
        if spiral.total_cost < axis_cost and (best is None or spiral.total_cost < best.total_cost):
            best = spiral
    if best is None:
        return _AxisPricing(rate=axis_cost)
    return _AxisPricing(rate=best.total_cost, spiral=best)


def _nearest_faces(v: np.ndarray) -> List[int]:
    """1-based faces among the two nearest to v (ties included)"""
    second = float(np.sort(v)[1])
    return [j + 1 for j in range(3) if v[j] <= second + settings.POSITION_ATOL * max(1.0, second)]


def _best_path(data: ProblemData, v: np.ndarray, pricing: _AxisPricing, inconclusive: bool) -> BestPath:
    scale = max(1.0, float(np.max(v)))
    zero = v <= settings.POSITION_ATOL * scale
    if np.all(zero):
        return BestPath(0.0, empty_path(np.zeros(3)), "origin", inconclusive)

    candidates: List[Tuple[float, str, Callable[[], RegulationTriple]]] = []

    if int(np.sum(zero)) == 2:
        axis = int(np.flatnonzero(~zero)[0]) + 1
        t = float(v[axis - 1])
        candidates.append((t * pricing.rate, pricing.label, lambda: pricing.prefix(data, axis, t)))

    elif int(np.sum(zero)) == 1:
        face = int(np.flatnonzero(zero)[0]) + 1
        point = v.copy()
        point[face - 1] = 0.0
        face_set = FaceSet.of(face)
        one_piece = float(one_piece_costs(data, face_set, point)[0][0])
        candidates.append((one_piece, "one_piece", lambda: optimal_segment(face_set, np.zeros(3), point, data)))
        for axis in (j for j in (1, 2, 3) if j != face):
            faces = FaceSet(tuple(j for j in (1, 2, 3) if j != axis))
            search = two_piece_via_axis(faces, face, point, data, axis_rate=pricing.rate)
            t = float(search.argmin[axis - 1])

            def build(axis=axis, t=t):
                prefix = pricing.prefix(data, axis, t)
                return merge_paths(prefix, optimal_segment(face_set, prefix.endpoint, point, data))

            candidates.append((search.value, f"{pricing.label}+face", build))

    else:
        point = v
        candidates.append((direct_cost(np.zeros(3), point, data), "direct",
                           lambda: optimal_segment(FaceSet(), np.zeros(3), point, data)))
        for face in _nearest_faces(point):
            face_set = FaceSet.of(face)
            for axis in (j for j in (1, 2, 3) if j != face):
                faces = FaceSet(tuple(j for j in (1, 2, 3) if j != axis))
                search = three_piece_gradual(faces, face, point, data, axis_rate=pricing.rate)
                t = float(search.axis_point[axis - 1])
                u = search.argmin

                def build(axis=axis, t=t, u=u, face_set=face_set):
                    path = pricing.prefix(data, axis, t)
                    if np.max(np.abs(u - path.endpoint)) > settings.POSITION_ATOL:
                        path = merge_paths(path, optimal_segment(face_set, path.endpoint, u, data))
                    return merge_paths(path, optimal_segment(FaceSet(), path.endpoint, point, data))

                candidates.append((search.value, f"{pricing.label}+face+direct", build))

    cost, family, build = min(candidates, key=lambda c: c[0])
    path = require_valid(build(), data)
    logger.debug("best path to %s: %s at %.10g", v.tolist(), family, cost)
    return BestPath(cost, path, family, inconclusive)


def _checked_point(v: np.ndarray) -> np.ndarray:
    v = as_point(v, "v")
    if np.any(v < -settings.POSITION_ATOL * max(1.0, float(np.max(np.abs(v))))):
        raise InvalidProblemData(f"v = {v.tolist()} is outside the octant")
    return np.maximum(v, 0.0)


def best_cost_to_point(params: RsParams, v: np.ndarray) -> BestPath:
    """
    Cheapest path to v over the gradual families with spiral-aware axis prefixes

    Axis points cost min(axis one-piece, spiral) per unit; face points add
    the axis-then-face family; interior points search three-piece paths
    whose last boundary point lies on one of the two nearest faces.
    ``inconclusive`` is set when the gradual-or-spiral dichotomy is not
    guaranteed for (r1, r2).
    """
    data, _ = _checked_problem(params)
    v = _checked_point(v)
    inconclusive = not dichotomy_holds(params.r1, params.r2)
    return _best_path(data, v, _spiral_pricing(data), inconclusive)


def best_gradual_cost(params: RsParams, v: np.ndarray) -> BestPath:
    """best_cost_to_point with axis prefixes priced by the one-piece axis cost only"""
    data, _ = _checked_problem(params)
    v = _checked_point(v)
    inconclusive = not dichotomy_holds(params.r1, params.r2)
    return _best_path(data, v, _AxisPricing(rate=axis_unit_cost(data, 3)), inconclusive)


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "condition1",
    "condition1_margin",
    "dichotomy_holds",
    "SpiralSolution",
    "spiral_objective",
    "build_spiral_path",
    "optimize_spiral",
    "evaluate_spiral",
    "Classification",
    "probe_cost",
    "classify_optimal_path",
    "BestPath",
    "best_cost_to_point",
    "best_gradual_cost"
]
