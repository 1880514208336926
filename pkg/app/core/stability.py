"""
Stability Classification
Completely-S / P-matrix tests, LCP support enumeration, beta ratio and the RS decision flow
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, List, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import SingularMatrixError
from app.core.geometry import rs_r_inverse, rs_reflection
from app.schemas.problem import RsParams
from app.schemas.reports import LcpKind, LcpSolution, Region, StabilityReport

logger = logging.getLogger(__name__)


# ==========================================
# MATRIX CLASSES
# ==========================================

def principal_subsets(n: int = 3) -> Iterator[Tuple[int, ...]]:
    for size in range(1, n + 1):
        yield from itertools.combinations(range(n), size)


@lru_cache(maxsize=None)
def _subsets_by_size(n: int) -> Tuple[np.ndarray, ...]:
    """Index arrays (count, size) of the principal subsets, one per size"""
    grouped = [[] for _ in range(n)]
    for subset in principal_subsets(n):
        grouped[len(subset) - 1].append(subset)
    return tuple(np.array(group, dtype=int) for group in grouped)


@lru_cache(maxsize=None)
def _vertex_rows(n: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(2 * n), n)), dtype=int)


def _blocks(r: np.ndarray, index: np.ndarray) -> np.ndarray:
    """Stack of the principal submatrices selected by index"""
    return r[index[:, :, None], index[:, None, :]]


def principal_minors(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return np.concatenate([np.linalg.det(_blocks(r, index)) for index in _subsets_by_size(r.shape[0])])


def s_matrix_margin(matrix: np.ndarray) -> float:
    """
    max over the simplex of min_i (M u)_i

    M is an S-matrix iff the margin is positive. The maximum of this LP
    sits on a vertex where n of the constraints {u_j = 0} and
    {(M u)_i = t} are active, so all vertices are solved as one batch.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    n = matrix.shape[0]
    ones = np.ones(n)
    row_sums = matrix @ ones
    if np.all(row_sums > 0):
        # any positive witness will do
        return float(np.min(row_sums) / n)

    constraints = np.vstack([
        np.hstack([matrix, -np.ones((n, 1))]),
        np.hstack([np.eye(n), np.zeros((n, 1))]),
    ])
    active = _vertex_rows(n)
    systems = np.empty((len(active), n + 1, n + 1))
    systems[:, :n, :] = constraints[active]
    systems[:, n, :] = np.append(ones, 0.0)
    systems = systems[np.abs(np.linalg.det(systems)) >= 1e-14]
    if not len(systems):
        return -np.inf

    rhs = np.zeros((len(systems), n + 1, 1))
    rhs[:, n, 0] = 1.0
    solutions = np.linalg.solve(systems, rhs)[..., 0]
    u, t = solutions[:, :n], solutions[:, n]
    feasible = np.all(u >= -1e-12, axis=1) & np.all(u @ matrix.T - t[:, None] >= -1e-12, axis=1)
    return float(np.max(t[feasible])) if np.any(feasible) else -np.inf


def is_p_matrix(r: np.ndarray) -> bool:
    """All principal minors positive"""
    return bool(np.all(principal_minors(r) > settings.REFLECTIVITY_TOL))


def _all_margins_positive(r: np.ndarray) -> bool:
    return all(
        s_matrix_margin(block) > settings.REFLECTIVITY_TOL
        for index in _subsets_by_size(r.shape[0])
        for block in _blocks(r, index)
    )


def is_completely_s(r: np.ndarray) -> bool:
    """Every principal submatrix admits u > 0 with (submatrix) u > 0"""
    r = np.asarray(r, dtype=float)
    # P-matrices are completely-S
    return is_p_matrix(r) or _all_margins_positive(r)


def rs_determinant(r1: float, r2: float) -> float:
    return 1.0 + r1 ** 3 + r2 ** 3 - 3.0 * r1 * r2


# ==========================================
# LCP
# ==========================================

@dataclass(frozen=True)
class LcpEnumeration:
    """All complementary solutions plus the supports whose subsystem was singular"""
    solutions: List[LcpSolution] = field(default_factory=list)
    degenerate_supports: List[Tuple[int, ...]] = field(default_factory=list)

    def __iter__(self) -> Iterator[LcpSolution]:
        return iter(self.solutions)

    def __len__(self) -> int:
        return len(self.solutions)

    @property
    def divergent(self) -> List[LcpSolution]:
        return [s for s in self.solutions if s.kind == LcpKind.DIVERGENT]

    @property
    def stable(self) -> List[LcpSolution]:
        return [s for s in self.solutions if s.kind == LcpKind.STABLE]


def solve_lcp(theta: np.ndarray, r: np.ndarray) -> LcpEnumeration:
    """
    Find u, v >= 0 with v = theta + R u and u.v = 0

    Enumerates the 2^n complementary supports S (u free on S, v zero on S),
    solving all supports of one size as a batch.

    Example:
        >>> solve_lcp(np.array([-1., -1., -1.]), np.eye(3)).stable[0].u
        [1.0, 1.0, 1.0]
    """
    theta = np.asarray(theta, dtype=float)
    r = np.asarray(r, dtype=float)
    n = theta.size
    tol = settings.MATRIX_RTOL * max(1.0, float(np.max(np.abs(theta))), float(np.max(np.abs(r))))

    supports: List[Tuple[int, ...]] = [()]
    rates = [np.zeros(n)]
    degenerate: List[Tuple[int, ...]] = []
    for index in _subsets_by_size(n):
        blocks = _blocks(r, index)
        solvable = np.abs(np.linalg.det(blocks)) > tol
        degenerate += [tuple(int(i) + 1 for i in row) for row in index[~solvable]]
        if not np.any(solvable):
            continue
        chosen = index[solvable]
        solved = np.linalg.solve(blocks[solvable], -theta[chosen][..., None])[..., 0]
        u = np.zeros((len(chosen), n))
        u[np.arange(len(chosen))[:, None], chosen] = solved
        supports += [tuple(int(i) for i in row) for row in chosen]
        rates += list(u)

    u_all = np.array(rates)
    v_all = theta + u_all @ r.T
    feasible = np.all(u_all >= -tol, axis=1) & np.all(v_all >= -tol, axis=1)

    solutions: List[LcpSolution] = []
    for row in np.flatnonzero(feasible):
        u = np.where(np.abs(u_all[row]) <= tol, 0.0, u_all[row])
        v = np.where(np.abs(v_all[row]) <= tol, 0.0, v_all[row])
        if any(np.allclose(u, s.u, atol=tol) for s in solutions):
            continue
        kind = LcpKind.STABLE if np.all(v == 0.0) else LcpKind.DIVERGENT
        solutions.append(LcpSolution(
            u=u.tolist(),
            v=v.tolist(),
            kind=kind,
            support=[i + 1 for i in supports[row]]
        ))

    if degenerate:
        logger.debug("LCP degenerate supports: %s", degenerate)
    return LcpEnumeration(solutions=solutions, degenerate_supports=degenerate)


# ==========================================
# RS REGIONS
# ==========================================

def region_of(r1: float, r2: float) -> Region:
    tol = settings.BOUNDARY_TOL
    if abs(r1 - 1.0) <= tol and abs(r2 - 1.0) <= tol:
        return Region.SINGULAR_POINT
    if r1 >= 1.0 and r2 >= 1.0:
        return Region.C3
    if r1 <= 1.0 and r2 <= 1.0:
        return Region.C4
    if r1 < 1.0:
        return Region.C1
    return Region.C2


def on_region_boundary(r1: float, r2: float) -> bool:
    tol = settings.BOUNDARY_TOL
    return (
        abs(r1 + r2 - 2.0) <= tol
        or abs(r1 + r2 + 1.0) <= tol
        or abs(r1 - 1.0) <= tol
        or abs(r2 - 1.0) <= tol
    )


def beta_ratio(theta0: float, r1: float, r2: float) -> Optional[float]:
    """
    Cubed ratio governing stability on C1 / C2

    Returns:
        ((1-r2)/(r1-1))^3 on C1, ((r1-1)/(1-r2))^3 on C2, None elsewhere
    """
    if not theta0 < 0:
        return None
    if r1 < 1.0 < r2:
        return ((1.0 - r2) / (r1 - 1.0)) ** 3
    if r2 < 1.0 < r1:
        return ((r1 - 1.0) / (1.0 - r2)) ** 3
    return None


def drift_condition(params: RsParams) -> bool:
    """R^-1 theta < 0 componentwise"""
    inverse = rs_r_inverse(params.r1, params.r2)
    return (inverse.a + inverse.b + inverse.c) * params.theta0 < 0


def closed_form_stable(params: RsParams) -> bool:
    return params.theta0 < 0 and -1.0 < params.r1 + params.r2 < 2.0


# ==========================================
# DECISION FLOW
# ==========================================

def classify_stability(params: RsParams) -> StabilityReport:
    """
    Run the existence/stability decision flow and the closed form

    completely-S -> R^-1 theta < 0 -> region split -> beta test (open
    C1/C2) or LCP test (C3, C4, boundaries). Both verdicts are recorded;
    the LCP is only enumerated when the flow reaches it.
    """
    theta = np.full(3, params.theta0)
    r = rs_reflection(params.r1, params.r2)
    p_matrix = is_p_matrix(r)
    completely_s = p_matrix or _all_margins_positive(r)
    region = region_of(params.r1, params.r2)
    boundary = on_region_boundary(params.r1, params.r2)
    beta = beta_ratio(params.theta0, params.r1, params.r2)

    drift: Optional[bool] = None
    lcp: Optional[LcpEnumeration] = None
    if region == Region.SINGULAR_POINT:
        lcp = solve_lcp(theta, r)
        stable = False
    elif not completely_s:
        stable = False
    else:
        try:
            drift = drift_condition(params)
        except SingularMatrixError:
            drift = None
        if not drift:
            stable = False
        elif region in (Region.C1, Region.C2) and not boundary and beta is not None:
            stable = beta < 1.0
        else:
            lcp = solve_lcp(theta, r)
            stable = not lcp.divergent and bool(lcp.stable)

    report = StabilityReport(
        completely_s=completely_s,
        p_matrix=p_matrix,
        drift_condition=drift,
        region=region,
        beta=beta,
        on_boundary=boundary or region == Region.SINGULAR_POINT,
        lcp_checked=lcp is not None,
        lcp_solutions=lcp.solutions if lcp is not None else [],
        lcp_degenerate_supports=[list(s) for s in lcp.degenerate_supports] if lcp is not None else [],
        stable=stable,
        closed_form_stable=closed_form_stable(params)
    )
    if not report.agrees and not report.on_boundary:
        logger.warning("stability verdicts disagree off the region boundary: %s", params)
    return report


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "principal_subsets",
    "principal_minors",
    "s_matrix_margin",
    "is_completely_s",
    "is_p_matrix",
    "rs_determinant",
    "LcpEnumeration",
    "solve_lcp",
    "region_of",
    "on_region_boundary",
    "beta_ratio",
    "drift_condition",
    "closed_form_stable",
    "classify_stability"
]
