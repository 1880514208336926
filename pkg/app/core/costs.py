"""
Path Costs
Direct and reflected one-piece costs, reflectivity, and the two/three-piece compositions
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np

from app.core.config import settings
from app.core.exceptions import InvalidProblemData, SingularMatrixError, UnsupportedCovarianceError
from app.core.geometry import ProblemData, as_point, inner, norm, row_norms
from app.core.minimize import grid_zoom, scan_then_golden
from app.core.paths import RegulationTriple, empty_path, segment_from_rates
from app.schemas.reports import CostEntry, CostReport, Provenance

logger = logging.getLogger(__name__)


# ==========================================
# FACE SETS
# ==========================================

@dataclass(frozen=True)
class FaceSet:
    """
    Subset K of {1,2,3} naming the face F_K = {z >= 0 : z_j = 0 for j in K}

    |K| = 1 is a face, |K| = 2 an axis, the empty set the whole octant.
    """
    indices: Tuple[int, ...] = ()

    def __post_init__(self):
        indices = tuple(sorted(set(int(i) for i in self.indices)))
        if any(i not in (1, 2, 3) for i in indices):
            raise InvalidProblemData(f"face indices must lie in {{1,2,3}}, got {list(self.indices)}")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def of(cls, *indices: int) -> "FaceSet":
        return cls(tuple(indices))

    @classmethod
    def parse(cls, text: Union[str, Iterable[int], None]) -> "FaceSet":
        """'1,2', '{1,2}', '' or an iterable of ints"""
        if text is None:
            return cls()
        if not isinstance(text, str):
            return cls(tuple(text))
        cleaned = text.strip().strip("{}").replace(" ", "")
        if not cleaned:
            return cls()
        try:
            return cls(tuple(int(part) for part in cleaned.split(",")))
        except ValueError as exc:
            raise InvalidProblemData(f"cannot parse face set {text!r}") from exc

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.indices) + "}"

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, index: int) -> bool:
        return index in self.indices

    @property
    def zero_based(self) -> List[int]:
        return [i - 1 for i in self.indices]

    @property
    def free(self) -> List[int]:
        """0-based coordinates not pinned by K"""
        return [j for j in range(3) if j + 1 not in self.indices]

    @property
    def axis(self) -> int:
        """1-based index of the axis direction for |K| = 2"""
        if len(self) != 2:
            raise InvalidProblemData(f"{self} is not an axis")
        return self.free[0] + 1

    def contains_point(self, point: np.ndarray) -> bool:
        point = np.asarray(point, dtype=float)
        scale = max(1.0, float(np.max(np.abs(point))))
        return bool(np.all(np.abs(point[self.zero_based]) <= settings.POSITION_ATOL * scale))

    def subsets(self) -> List["FaceSet"]:
        """Nonempty subsets, smallest first"""
        return [
            FaceSet(combo)
            for size in range(1, len(self) + 1)
            for combo in itertools.combinations(self.indices, size)
        ]

    def rotate(self, shift: int) -> "FaceSet":
        """Face set of the rotated coordinates (see geometry.rotate_vector)"""
        return FaceSet(tuple(((i - 1 - shift) % 3) + 1 for i in self.indices))


def faces_of_point(point: np.ndarray) -> FaceSet:
    """Largest K with point in F_K"""
    point = np.asarray(point, dtype=float)
    scale = max(1.0, float(np.max(np.abs(point))))
    return FaceSet(tuple(j + 1 for j in range(3) if abs(point[j]) <= settings.POSITION_ATOL * scale))


def unit(index: int) -> np.ndarray:
    """1-based unit vector"""
    vector = np.zeros(3)
    vector[index - 1] = 1.0
    return vector


# ==========================================
# VALUE TYPES
# ==========================================

@dataclass(frozen=True, eq=False)
class ProjectionPair:
    """B_K = (R_K' R_K)^-1 R_K' and A_K = I - R_K B_K"""
    b_matrix: np.ndarray
    a_matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class CostValue:
    value: float
    provenance: Provenance = Provenance.CLOSED_FORM
    attained: bool = True
    support: FaceSet = FaceSet()
    reflectivity: Optional[np.ndarray] = None

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True, eq=False)
class PivotSearch:
    """Composite cost and where its intermediate point sits"""
    value: float
    argmin: np.ndarray
    axis_point: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class _SupportGeometry:
    r_cols: np.ndarray
    a: np.ndarray
    b: np.ndarray
    a_theta: np.ndarray
    a_theta_norm: float
    b_theta: np.ndarray


def require_identity_covariance(data: ProblemData, what: str) -> None:
    if not data.identity_covariance:
        raise UnsupportedCovarianceError(f"{what} requires Gamma = I")


def _support_geometry(data: ProblemData, support: FaceSet) -> _SupportGeometry:
    def build() -> _SupportGeometry:
        r_cols = data.r[:, support.zero_based]
        gram = r_cols.T @ r_cols
        if abs(np.linalg.det(gram)) <= settings.MATRIX_RTOL * max(1.0, float(np.max(np.abs(gram)))) ** len(support):
            raise SingularMatrixError(
                f"reflection columns {support} are collinear",
                {"columns": r_cols.T.tolist()}
            )
        b = np.linalg.solve(gram, r_cols.T)
        a = np.eye(3) - r_cols @ b
        a_theta = a @ data.theta
        return _SupportGeometry(
            r_cols=r_cols,
            a=a,
            b=b,
            a_theta=a_theta,
            a_theta_norm=float(np.linalg.norm(a_theta)),
            b_theta=b @ data.theta
        )

    return data.cached(("support", support.indices), build)


# ==========================================
# DIRECT COST
# ==========================================

def direct_cost(w: np.ndarray, v: np.ndarray, data: ProblemData) -> float:
    """||theta|| ||v - w|| - <theta, v - w>, never negative"""
    d = np.asarray(v, dtype=float) - np.asarray(w, dtype=float)
    return max(data.theta_norm * norm(d, data) - inner(data.theta, d, data), 0.0)


def direct_costs(data: ProblemData, displacements: np.ndarray) -> np.ndarray:
    d = np.atleast_2d(displacements)
    values = data.theta_norm * row_norms(d, data) - d @ (data.gamma_inv @ data.theta)
    return np.maximum(values, 0.0)


# ==========================================
# PROJECTION & REFLECTED COST
# ==========================================

def projection(data: ProblemData, faces: FaceSet) -> ProjectionPair:
    """
    Projection pair for the reflection columns in K

    Example:
        K = {} gives A = I and an empty B
    """
    if not len(faces):
        return ProjectionPair(b_matrix=np.zeros((0, 3)), a_matrix=np.eye(3))
    require_identity_covariance(data, "projection")
    geometry = _support_geometry(data, faces)
    return ProjectionPair(b_matrix=geometry.b, a_matrix=geometry.a)


def _check_reflected(faces: FaceSet, w: np.ndarray, v: np.ndarray) -> None:
    if len(faces) > 2:
        raise InvalidProblemData("reflected costs need |K| <= 2 (the origin costs 0)")
    for name, point in (("start", w), ("end", v)):
        if not faces.contains_point(point):
            raise InvalidProblemData(
                f"{name} point {np.asarray(point).tolist()} is not on face F_{faces}",
                {"faces": list(faces.indices)}
            )


def reflectivity_check(
    faces: FaceSet,
    v: np.ndarray,
    data: ProblemData,
    w: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, bool]:
    """
    Pushing rates of the one-piece reflected segment and their positivity

    Returns:
        ((||A theta|| / ||A d||) B d - B theta, all components > 0)
    """
    if not len(faces):
        return np.zeros(0), True
    require_identity_covariance(data, "reflectivity_check")
    d = as_point(v, "v") - (np.zeros(3) if w is None else as_point(w, "w"))
    geometry = _support_geometry(data, faces)
    ad_norm = float(np.linalg.norm(geometry.a @ d))
    if ad_norm <= settings.POSITION_ATOL:
        raise InvalidProblemData(
            f"displacement lies in the span of reflection columns {faces}",
            {"displacement": d.tolist()}
        )
    vector = (geometry.a_theta_norm / ad_norm) * (geometry.b @ d) - geometry.b_theta
    return vector, bool(np.all(vector > settings.REFLECTIVITY_TOL))


def reflected_cost(faces: FaceSet, w: np.ndarray, v: np.ndarray, data: ProblemData) -> float:
    """
    ||A d|| ||A theta|| - <A theta, A d> with d = v - w

    Equals the one-piece reflected cost when the reflectivity check
    passes; otherwise it is only a lower bound. Falls back to the
    numeric segment oracle for Gamma != I.
    """
    return evaluate_reflected(faces, w, v, data).value


def evaluate_reflected(faces: FaceSet, w: np.ndarray, v: np.ndarray, data: ProblemData) -> CostValue:
    w, v = as_point(w, "w"), as_point(v, "v")
    _check_reflected(faces, w, v)
    if not len(faces):
        return CostValue(direct_cost(w, v, data))
    if not data.identity_covariance:
        from app.core.oracle import segment_cost_oracle

        logger.warning("Gamma != I: reflected cost on F_%s evaluated numerically", faces)
        return CostValue(segment_cost_oracle(w, v, faces, data), provenance=Provenance.NUMERIC, support=faces)

    d = v - w
    if not np.any(d):
        return CostValue(0.0, support=faces)
    geometry = _support_geometry(data, faces)
    ad = geometry.a @ d
    value = max(float(np.linalg.norm(ad)) * geometry.a_theta_norm - float(ad @ geometry.a_theta), 0.0)
    vector, holds = reflectivity_check(faces, v, data, w=w)
    if not holds:
        logger.debug("reflectivity fails on F_%s (rates %s): formula is a lower bound", faces, vector)
    return CostValue(value, attained=holds, support=faces, reflectivity=vector)


# ==========================================
# ATTAINED ONE-PIECE COST
# ==========================================

def one_piece_costs(
    data: ProblemData,
    faces: FaceSet,
    displacements: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Attained one-piece cost on F_K for a batch of displacements (Gamma = I)

    Minimum of the projection formula over pushing supports S within K
    whose rates are nonnegative; S = {} is the direct cost.

    Returns:
        (values, chosen support index into [{}] + faces.subsets())
    """
    d = np.atleast_2d(np.asarray(displacements, dtype=float))
    best = direct_costs(data, d)
    choice = np.zeros(len(d), dtype=int)
    for index, support in enumerate(faces.subsets(), start=1):
        geometry = _support_geometry(data, support)
        ad = d @ geometry.a.T
        ad_norm = np.linalg.norm(ad, axis=1)
        values = ad_norm * geometry.a_theta_norm - ad @ geometry.a_theta
        safe = np.where(ad_norm > 0, ad_norm, 1.0)
        rates = (geometry.a_theta_norm / safe)[:, None] * (d @ geometry.b.T) - geometry.b_theta
        feasible = (ad_norm > 0) & np.all(rates >= -settings.REFLECTIVITY_TOL, axis=1)
        better = feasible & (values < best)
        best = np.where(better, values, best)
        choice = np.where(better, index, choice)
    return np.maximum(best, 0.0), choice


def attained_cost(faces: FaceSet, w: np.ndarray, v: np.ndarray, data: ProblemData) -> CostValue:
    """One-piece cost on F_K with pushing rates constrained to y >= 0"""
    w, v = as_point(w, "w"), as_point(v, "v")
    _check_reflected(faces, w, v)
    if not data.identity_covariance:
        from app.core.oracle import segment_cost_oracle

        return CostValue(segment_cost_oracle(w, v, faces, data), provenance=Provenance.NUMERIC, support=faces)
    values, choice = one_piece_costs(data, faces, v - w)
    support = ([FaceSet()] + faces.subsets())[int(choice[0])]
    return CostValue(float(values[0]), support=support)


def optimal_segment(faces: FaceSet, w: np.ndarray, v: np.ndarray, data: ProblemData) -> RegulationTriple:
    """
    Explicit one-segment path from w to v on F_K realizing attained_cost

    T = ||A d|| / ||A theta||, ydot = pushing rates of the chosen support,
    xdot = zdot - R ydot.
    """
    w, v = as_point(w, "w"), as_point(v, "v")
    _check_reflected(faces, w, v)
    require_identity_covariance(data, "optimal_segment")
    d = v - w
    if not np.any(d):
        return empty_path(w)

    _, choice = one_piece_costs(data, faces, d)
    support = ([FaceSet()] + faces.subsets())[int(choice[0])]
    ydot = np.zeros(3)
    if len(support):
        geometry = _support_geometry(data, support)
        ad_norm = float(np.linalg.norm(geometry.a @ d))
        duration = ad_norm / geometry.a_theta_norm
        ydot[support.zero_based] = np.maximum(
            (geometry.a_theta_norm / ad_norm) * (geometry.b @ d) - geometry.b_theta, 0.0
        )
    else:
        duration = norm(d, data) / data.theta_norm
    zdot = d / duration
    xdot = zdot - data.r @ ydot
    return RegulationTriple(origin=w, segments=[segment_from_rates(w, duration, xdot, ydot, data)])


def axis_unit_cost(data: ProblemData, axis: int) -> float:
    """Attained one-piece cost from the origin to the unit point on axis e_axis"""
    faces = FaceSet(tuple(j for j in (1, 2, 3) if j != axis))
    return float(one_piece_costs(data, faces, unit(axis))[0][0])


# ==========================================
# COMPOSITIONS
# ==========================================

def _search_box(v: np.ndarray) -> float:
    return 4.0 * max(float(np.linalg.norm(v)), 1e-12)


def two_piece_via_face(
    faces: FaceSet,
    v: np.ndarray,
    data: ProblemData,
    axis_rate: Optional[float] = None
) -> PivotSearch:
    """
    inf over w in F_K of I_K(w) + I_0(w, v)

    2-D grid search for a face, 1-D scan + golden section for an axis.
    ``axis_rate`` overrides the per-unit axis cost (|K| = 2 only).
    """
    v = as_point(v, "v")
    require_identity_covariance(data, "two_piece_via_face")
    if len(faces) not in (1, 2):
        raise InvalidProblemData("two-piece via face needs |K| in {1, 2}")
    if faces.contains_point(v):
        raise InvalidProblemData(f"v = {v.tolist()} lies on F_{faces}")
    upper = _search_box(v)

    if len(faces) == 2:
        direction = unit(faces.axis)
        rate = axis_unit_cost(data, faces.axis) if axis_rate is None else axis_rate
        objective = lambda t: rate * t + direct_costs(data, v - np.outer(t, direction))
        result = scan_then_golden(objective, 0.0, upper)
        t = float(result.x[0])
        return PivotSearch(result.value, t * direction)

    p, q = faces.free

    def objective(points: np.ndarray) -> np.ndarray:
        w = np.zeros((len(points), 3))
        w[:, p] = points[:, 0]
        w[:, q] = points[:, 1]
        return one_piece_costs(data, faces, w)[0] + direct_costs(data, v - w)

    result = grid_zoom(objective, [0.0, 0.0], [upper, upper])
    w = np.zeros(3)
    w[[p, q]] = result.x
    return PivotSearch(result.value, w)


def two_piece_via_axis(
    faces: FaceSet,
    face: int,
    v: np.ndarray,
    data: ProblemData,
    axis_rate: Optional[float] = None
) -> PivotSearch:
    """inf over w on axis F_K of I_K(w) + I_i(w, v), for v on face F_i"""
    v = as_point(v, "v")
    require_identity_covariance(data, "two_piece_via_axis")
    if len(faces) != 2 or face not in faces:
        raise InvalidProblemData(f"two-piece via axis needs |K| = 2 and i in K, got K={faces}, i={face}")
    face_set = FaceSet.of(face)
    if not face_set.contains_point(v):
        raise InvalidProblemData(f"v = {v.tolist()} is not on face F_{face}")
    if faces.contains_point(v):
        raise InvalidProblemData(f"v = {v.tolist()} lies on the axis F_{faces}")

    direction = unit(faces.axis)
    rate = axis_unit_cost(data, faces.axis) if axis_rate is None else axis_rate
    objective = lambda t: rate * t + one_piece_costs(data, face_set, v - np.outer(t, direction))[0]
    result = scan_then_golden(objective, 0.0, _search_box(v))
    return PivotSearch(result.value, float(result.x[0]) * direction)


def three_piece_gradual(
    faces: FaceSet,
    face: int,
    v: np.ndarray,
    data: ProblemData,
    axis_rate: Optional[float] = None
) -> PivotSearch:
    """
    inf over u in F_i of [two-piece via axis to u] + I_0(u, v)

    The axis point and u are searched jointly, which is the same
    infimum as the nested form.
    """
    v = as_point(v, "v")
    require_identity_covariance(data, "three_piece_gradual")
    if len(faces) != 2 or face not in faces:
        raise InvalidProblemData(f"three-piece path needs |K| = 2 and i in K, got K={faces}, i={face}")
    if np.any(v <= settings.POSITION_ATOL):
        raise InvalidProblemData(f"v = {v.tolist()} is not interior")

    face_set = FaceSet.of(face)
    direction = unit(faces.axis)
    rate = axis_unit_cost(data, faces.axis) if axis_rate is None else axis_rate
    p, q = face_set.free
    upper = _search_box(v)

    def objective(points: np.ndarray) -> np.ndarray:
        t = points[:, 0]
        u = np.zeros((len(points), 3))
        u[:, p] = points[:, 1]
        u[:, q] = points[:, 2]
        face_leg = one_piece_costs(data, face_set, u - np.outer(t, direction))[0]
        return rate * t + face_leg + direct_costs(data, v - u)

    result = grid_zoom(objective, [0.0, 0.0, 0.0], [upper, upper, upper], initial_points=settings.GRID_POINTS)
    u = np.zeros(3)
    u[[p, q]] = result.x[1:]
    return PivotSearch(result.value, u, axis_point=float(result.x[0]) * direction)


# ==========================================
# REPORT
# ==========================================

def cost_report(data: ProblemData, v: np.ndarray, w: Optional[np.ndarray] = None) -> CostReport:
    """Every applicable cost for the query point v (from w, default origin)"""
    v = as_point(v, "v")
    w = np.zeros(3) if w is None else as_point(w, "w")
    entries = [CostEntry(family="direct", value=direct_cost(w, v, data))]

    on = faces_of_point(v)
    if np.any(w):
        on = FaceSet(tuple(i for i in on.indices if i in faces_of_point(w).indices))
    for faces in on.subsets():
        if len(faces) > 2:
            continue
        formula = evaluate_reflected(faces, w, v, data)
        attained = attained_cost(faces, w, v, data)
        entries.append(CostEntry(
            family="reflected",
            faces=list(faces.indices),
            value=formula.value,
            provenance=formula.provenance,
            attained=formula.attained,
            reflectivity=None if formula.reflectivity is None else formula.reflectivity.tolist()
        ))
        entries.append(CostEntry(
            family="one_piece",
            faces=list(faces.indices),
            value=attained.value,
            provenance=attained.provenance,
            argmin=None
        ))

    if data.identity_covariance and not np.any(w):
        axes = [FaceSet.of(1, 2), FaceSet.of(1, 3), FaceSet.of(2, 3)]
        if len(on) == 1:
            face = on.indices[0]
            for faces in axes:
                if face in faces:
                    search = two_piece_via_axis(faces, face, v, data)
                    entries.append(CostEntry(
                        family="two_piece_axis",
                        faces=list(faces.indices),
                        via=face,
                        value=search.value,
                        argmin=search.argmin.tolist()
                    ))
        elif not len(on):
            for faces in [FaceSet.of(1), FaceSet.of(2), FaceSet.of(3)] + axes:
                search = two_piece_via_face(faces, v, data)
                entries.append(CostEntry(
                    family="two_piece_face",
                    faces=list(faces.indices),
                    value=search.value,
                    argmin=search.argmin.tolist()
                ))
            for faces in axes:
                for face in faces.indices:
                    search = three_piece_gradual(faces, face, v, data)
                    entries.append(CostEntry(
                        family="three_piece",
                        faces=list(faces.indices),
                        via=face,
                        value=search.value,
                        argmin=search.argmin.tolist()
                    ))
    return CostReport(point=v.tolist(), start=w.tolist(), entries=entries)


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "FaceSet",
    "faces_of_point",
    "unit",
    "ProjectionPair",
    "CostValue",
    "PivotSearch",
    "require_identity_covariance",
    "direct_cost",
    "direct_costs",
    "projection",
    "reflectivity_check",
    "reflected_cost",
    "evaluate_reflected",
    "one_piece_costs",
    "attained_cost",
    "optimal_segment",
    "axis_unit_cost",
    "two_piece_via_face",
    "two_piece_via_axis",
    "three_piece_gradual",
    "cost_report"
]
