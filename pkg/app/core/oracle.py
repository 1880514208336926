"""
Brute-Force Oracle
Numeric segment costs, gradual path enumeration and the seeded lemma property suite
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import optimize

from app.core.config import settings
from app.core.costs import (
    FaceSet,
    axis_unit_cost,
    direct_cost,
    direct_costs,
    faces_of_point,
    one_piece_costs,
    optimal_segment,
    projection,
    reflected_cost,
    reflectivity_check,
    require_identity_covariance,
    unit,
)
from app.core.exceptions import InvalidProblemData, OptimizationError, SingularMatrixError, UnstableDataError
from app.core.geometry import (
    ProblemData,
    as_point,
    norm,
    rotate_vector,
    rs_covariance,
    rs_gamma_inverse,
    rs_problem,
    rs_r_inverse,
    rs_reflection,
)
from app.core.minimize import golden_section
from app.core.solver import condition1
from app.core.stability import classify_stability, closed_form_stable
from app.schemas.problem import RsParams
from app.schemas.reports import CheckSummary, OracleConfig, OracleReport, SurveyReport, ViolationRecord

logger = logging.getLogger(__name__)

CHUNK = 100  # points drawn per sampled data instance
MARGIN = 1e-12  # relative slack on inequalities
MAX_RECORDED = 100  # violation records kept per check
EQUIVALENCE_DRAW_FACTOR = 20  # draws allowed per requested equivalence instance

FACE_SETS = [FaceSet(), FaceSet.of(1), FaceSet.of(2), FaceSet.of(3), FaceSet.of(1, 2), FaceSet.of(1, 3), FaceSet.of(2, 3)]


# ==========================================
# SEGMENT ORACLE
# ==========================================

def segment_cost_oracle(
    w: np.ndarray,
    v: np.ndarray,
    faces: FaceSet,
    data: ProblemData,
    forbid_push: bool = False
) -> float:
    """
    Numeric one-piece cost from w to v on F_K

    Minimizes 1/2 ||d/T - R_K y - theta||^2_Gamma T over y >= 0 (NNLS for
    each T) and over T > 0 (log-scale scan plus golden section). Works for
    any Gamma.

    Args:
        forbid_push: force y = 0, which gives the direct cost

    Raises:
        OptimizationError: the minimum over T sits at the edge of the scan
    """
    w, v = as_point(w, "w"), as_point(v, "v")
    if len(faces) > 2:
        raise InvalidProblemData("segment oracle needs |K| <= 2")
    for name, point in (("w", w), ("v", v)):
        if not faces.contains_point(point):
            raise InvalidProblemData(f"{name} = {point.tolist()} is not on face F_{faces}")
    d = v - w
    if not np.any(d):
        return 0.0

    # Gamma^-1 = U' U
    factor = data.cached("oracle_factor", lambda: np.linalg.cholesky(data.gamma_inv).T)
    drift = factor @ data.theta
    step = factor @ d
    columns = factor @ data.r[:, faces.zero_based]
    push = bool(len(faces)) and not forbid_push

    def cost(log_t: float) -> float:
        t = math.exp(log_t)
        target = step / t - drift
        if push:
            residual = optimize.nnls(columns, target)[1] ** 2
        else:
            residual = float(target @ target)
        return 0.5 * t * residual

    theta_norm = data.theta_norm
    center = math.log(norm(d, data) / theta_norm if theta_norm > 0 else norm(d, data))
    half = 4.0 * math.log(10.0)
    grid = np.linspace(center - half, center + half, settings.SCAN_POINTS)
    values = np.array([cost(s) for s in grid])
    best = int(np.argmin(values))
    if best in (0, len(grid) - 1):
        raise OptimizationError(
            "segment oracle: minimum over T at the edge of the scan",
            {"faces": list(faces.indices), "w": w.tolist(), "v": v.tolist(), "T": math.exp(grid[best])}
        )
    refined = golden_section(cost, grid[best - 1], grid[best + 1], settings.GOLDEN_TOL)
    return float(min(refined.value, values[best]))


# ==========================================
# GRADUAL ENUMERATION
# ==========================================

def _grid_minimize(objective: Callable[[np.ndarray], np.ndarray], dim: int, upper: float, resolution: int) -> float:
    """Grid over [0, upper]^dim, then L-BFGS-B from the three best nodes"""
    axes = [np.linspace(0.0, upper, resolution)] * dim
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    values = np.asarray(objective(mesh), dtype=float)
    best = float(np.min(values))

    scalar = lambda x: float(objective(np.atleast_2d(x))[0])
    for index in np.argsort(values)[:3]:
        result = optimize.minimize(scalar, mesh[index], method="L-BFGS-B", bounds=[(0.0, upper)] * dim)
        if np.isfinite(result.fun):
            best = min(best, float(result.fun))
    return best


def enumerate_gradual(v: np.ndarray, data: ProblemData, cfg: Optional[OracleConfig] = None) -> float:
    """
    Brute-force minimum over the gradual path families to v

    Axis points: one segment. Face points: one segment, or an axis
    segment followed by a face segment. Interior points: direct, axis
    then direct, face then direct, axis then face then direct, pivoting
    on every face and axis.
    """
    cfg = cfg or OracleConfig()
    v = as_point(v, "v")
    require_identity_covariance(data, "enumerate_gradual")
    if data.params is not None and not classify_stability(data.params).stable:
        raise UnstableDataError("gradual enumeration needs stable data", data.params.model_dump())
    if not np.any(v > settings.POSITION_ATOL):
        return 0.0

    on = faces_of_point(v)
    resolution = cfg.grid_resolution
    upper = 2.0 * float(np.linalg.norm(v))
    rates = {m: axis_unit_cost(data, m) for m in (1, 2, 3)}
    candidates: List[float] = []

    if len(on):
        candidates.append(float(one_piece_costs(data, on, v)[0][0]))
        if len(on) == 1:
            face = on.indices[0]
            face_set = FaceSet.of(face)
            for m in (j for j in (1, 2, 3) if j != face):
                direction = unit(m)
                candidates.append(_grid_minimize(
                    lambda t, m=m, direction=direction: rates[m] * t[:, 0]
                    + one_piece_costs(data, face_set, v - np.outer(t[:, 0], direction))[0],
                    1, upper, resolution * resolution
                ))
        return min(candidates)

    candidates.append(direct_cost(np.zeros(3), v, data))
    for m in (1, 2, 3):
        direction = unit(m)
        candidates.append(_grid_minimize(
            lambda t, m=m, direction=direction: rates[m] * t[:, 0] + direct_costs(data, v - np.outer(t[:, 0], direction)),
            1, upper, resolution * resolution
        ))

    for face in (1, 2, 3):
        face_set = FaceSet.of(face)
        p, q = face_set.free

        def pivot(points: np.ndarray, p=p, q=q) -> np.ndarray:
            u = np.zeros((len(points), 3))
            u[:, p] = points[:, -2]
            u[:, q] = points[:, -1]
            return u

        candidates.append(_grid_minimize(
            lambda x, face_set=face_set, pivot=pivot: one_piece_costs(data, face_set, pivot(x))[0]
            + direct_costs(data, v - pivot(x)),
            2, upper, resolution
        ))
        for m in (j for j in (1, 2, 3) if j != face):
            direction = unit(m)

            def three_piece(x: np.ndarray, m=m, direction=direction, face_set=face_set, pivot=pivot) -> np.ndarray:
                u = pivot(x)
                leg = one_piece_costs(data, face_set, u - np.outer(x[:, 0], direction))[0]
                return rates[m] * x[:, 0] + leg + direct_costs(data, v - u)

            candidates.append(_grid_minimize(three_piece, 3, upper, resolution))

    value = min(candidates)
    logger.debug("gradual enumeration to %s: %.10g", v.tolist(), value)
    return value


# ==========================================
# SUITE PLUMBING
# ==========================================

class _Recorder:
    """Pass/fail tally and violation records for one check"""

    def __init__(self, name: str, expected_violations: bool = False):
        self.summary = CheckSummary(name=name, expected_violations=expected_violations)
        self.violations: List[ViolationRecord] = []

    def record(self, ok: Any, detail: str, instance: Callable[[int], Dict[str, Any]]) -> None:
        ok = np.atleast_1d(np.asarray(ok, dtype=bool))
        self.summary.passed += int(np.sum(ok))
        failed = np.flatnonzero(~ok)
        self.summary.failed += len(failed)
        for index in failed:
            if len(self.violations) >= MAX_RECORDED:
                break
            self.violations.append(ViolationRecord(check=self.summary.name, instance=instance(int(index)), detail=detail))

    def skip(self, count: int = 1) -> None:
        self.summary.skipped += count


def _at_least(lhs: Any, rhs: Any) -> np.ndarray:
    """lhs >= rhs up to MARGIN scaled by the magnitudes involved"""
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return lhs - rhs >= -MARGIN * scale


def _chunks(samples: int):
    for start in range(0, samples, CHUNK):
        yield min(CHUNK, samples - start)


def _drift(rng: np.random.Generator) -> float:
    return float(rng.uniform(-2.0, -0.25))


def _params(rng: np.random.Generator, r1: float, r2: float, general: bool = False) -> RsParams:
    if not general:
        return RsParams(theta0=_drift(rng), r1=r1, r2=r2)
    return RsParams(
        theta0=_drift(rng),
        r1=r1,
        r2=r2,
        sigma2=float(rng.uniform(0.25, 4.0)),
        rho=float(rng.uniform(-0.45, 0.9))
    )


def _nonnegative_pair(rng: np.random.Generator) -> Tuple[float, float]:
    return float(rng.uniform(0.0, 2.0)), float(rng.uniform(0.0, 2.0))


def _condition1_pair(rng: np.random.Generator) -> Tuple[float, float]:
    while True:
        r2 = float(rng.uniform(0.0, 1.0))
        r1 = float(rng.uniform(r2, 2.0 - r2))
        if condition1(r1, r2):
            return r1, r2


def _instance(params: RsParams, **values: Any) -> Dict[str, Any]:
    record: Dict[str, Any] = {"params": params.model_dump()}
    for key, value in values.items():
        record[key] = np.asarray(value).tolist()
    return record


def _on_face(face: int, *coordinates: np.ndarray) -> np.ndarray:
    """(N, 3) points with coordinate ``face`` zero and the others filled in order"""
    points = np.zeros((len(coordinates[0]), 3))
    free = [j for j in range(3) if j != face - 1]
    points[:, free[0]] = coordinates[0]
    points[:, free[1]] = coordinates[1]
    return points


# ==========================================
# PATH REPLACEMENT CHECKS
# ==========================================

def _check_switchback(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """Direct-reflected-direct detour through F_2 between points of F_1 is beaten"""
    face2 = FaceSet.of(2)
    for n in _chunks(samples):
        params = _params(rng, *_nonnegative_pair(rng))
        data = rs_problem(params)
        a2, a3, b1, b3, c1, c3, d2, d3 = rng.uniform(0.05, 2.0, size=(8, n))
        v1, v2 = _on_face(1, a2, a3), _on_face(2, b1, b3)
        v3, v4 = _on_face(2, c1, c3), _on_face(1, d2, d3)

        p = a2 ** 2 + (b3 - a3) ** 2
        q = d2 ** 2 + (d3 - c3) ** 2
        first = b1 >= c1
        gap = np.where(
            first,
            np.sqrt(p + b1 ** 2) + np.sqrt(q + c1 ** 2) - np.sqrt(p + (b1 - c1) ** 2) - np.sqrt(q),
            np.sqrt(p + b1 ** 2) + np.sqrt(q + c1 ** 2) - np.sqrt(p) - np.sqrt(q + (c1 - b1) ** 2)
        )

        moved2 = _on_face(2, np.where(first, b1 - c1, 0.0), b3)
        moved3 = _on_face(2, np.where(first, 0.0, c1 - b1), c3)
        original = direct_costs(data, v2 - v1) + one_piece_costs(data, face2, v3 - v2)[0] + direct_costs(data, v4 - v3)
        replaced = direct_costs(data, moved2 - v1) + one_piece_costs(data, face2, moved3 - moved2)[0] \
            + direct_costs(data, v4 - moved3)

        instance = lambda i: _instance(params, v1=v1[i], v2=v2[i], v3=v3[i], v4=v4[i])
        recorder.record(gap > 0, "square-root gap not positive", instance)
        recorder.record(_at_least(original, replaced), "replacement path not cheaper", instance)


def _check_axis_eliminate(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """Direct segment into F_2 then reflected to e3 loses to dropping straight onto the axis"""
    face2 = FaceSet.of(2)
    e3 = unit(3)
    for n in _chunks(samples):
        params = _params(rng, *_nonnegative_pair(rng))
        data = rs_problem(params)
        a2, a3, b1, b3 = rng.uniform(0.05, 2.0, size=(4, n))
        v1, v2 = _on_face(1, a2, a3), _on_face(2, b1, b3)
        dropped = _on_face(2, np.zeros(n), b3)

        original = direct_costs(data, v2 - v1) + one_piece_costs(data, face2, e3 - v2)[0]
        replaced = direct_costs(data, dropped - v1) + one_piece_costs(data, face2, e3 - dropped)[0]

        bound = np.empty(n)
        for i in range(n):
            reflected = optimal_segment(face2, v2[i], e3, data).segments[0]
            direct_time = norm(v2[i] - v1[i], data) / data.theta_norm
            bound[i] = 0.5 * (
                b1[i] ** 2 / reflected.duration + b1[i] ** 2 / direct_time
                + 2.0 * params.r2 * b1[i] * reflected.ydot[1]
            )

        instance = lambda i: _instance(params, v1=v1[i], v2=v2[i], bound=bound[i])
        recorder.record(bound > 0, "positivity bound not positive", instance)
        recorder.record(_at_least(original - replaced, bound), "cost gap below the positivity bound", instance)


def _check_different_r(
    rng: np.random.Generator,
    samples: int,
    cfg: OracleConfig,
    recorder: _Recorder,
    reversed_order: bool = False
) -> None:
    """
    Reflecting on F_1 to (0, a, b) costs at least reflecting on F_2 to (a, 0, b)

    Needs r1 >= r2 and b >= a; ``reversed_order`` samples r1 < r2 instead.
    Also checks the cost-gap identity of the swapped construction under a
    general RS covariance.
    """
    face1, face2 = FaceSet.of(1), FaceSet.of(2)
    for n in _chunks(samples):
        low, high = sorted(_nonnegative_pair(rng))
        r1, r2 = (low, high) if reversed_order else (high, low)
        params = _params(rng, r1, r2)
        data = rs_problem(params)
        a, b = np.sort(rng.uniform(0.0, 2.0, size=(2, n)), axis=0)
        on1, on2 = _on_face(1, a, b), _on_face(2, a, b)
        lhs = one_piece_costs(data, face1, on1)[0]
        rhs = one_piece_costs(data, face2, on2)[0]
        recorder.record(
            _at_least(lhs, rhs),
            "I_1(0,a,b) < I_2(a,0,b)",
            lambda i: _instance(params, v=on1[i], v_bar=on2[i], lhs=lhs[i], rhs=rhs[i])
        )

        general = _params(rng, r1, r2, general=True)
        gdata = rs_problem(general)
        inverse = rs_gamma_inverse(general.sigma2, general.rho)
        z1, z2 = np.sort(rng.uniform(0.0, 2.0, size=(2, n)), axis=0)
        y = rng.uniform(0.0, 2.0, size=n)
        t = rng.uniform(0.1, 3.0, size=n)
        theta = gdata.theta
        before = np.stack([np.zeros(n), z1, z2], axis=1) - np.outer(y, gdata.r[:, 0]) - theta
        after = np.stack([z1, np.zeros(n), z2], axis=1) - np.outer(y, gdata.r[:, 1]) - theta
        quad = lambda x: np.einsum("ij,jk,ik->i", x, gdata.gamma_inv, x)
        gap = 0.5 * (quad(before) - quad(after)) * t
        formula = (r1 - r2) * (inverse.gamma0 - inverse.gamma1) * (z2 - z1) * y * t / general.sigma2
        instance = lambda i: _instance(general, z=[z1[i], z2[i]], y=y[i], T=t[i], gap=gap[i], formula=formula[i])
        scale = np.maximum(1.0, np.abs(formula))
        recorder.record(np.abs(gap - formula) <= 1e-9 * scale, "cost gap differs from its closed form", instance)
        recorder.record(_at_least(gap, 0.0), "cost gap negative", instance)


def _check_different_r_reversed(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    _check_different_r(rng, samples, cfg, recorder, reversed_order=True)


def _face2_profile(data: ProblemData) -> Callable[[np.ndarray], np.ndarray]:
    """G(x) = ||A d|| ||A theta|| - <A d, A theta> for d = (x, 0, 1) on F_2"""
    a = projection(data, FaceSet.of(2)).a_matrix
    a_theta = a @ data.theta
    a_theta_norm = float(np.linalg.norm(a_theta))

    def profile(x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d = np.stack([x, np.zeros_like(x), np.ones_like(x)], axis=1)
        ad = d @ a.T
        return np.linalg.norm(ad, axis=1) * a_theta_norm - ad @ a_theta

    return profile


def face2_slope_at_axis(data: ProblemData) -> float:
    """Closed-form right derivative of G at 0"""
    a = projection(data, FaceSet.of(2)).a_matrix
    a_theta = a @ data.theta
    ratio = float(np.linalg.norm(a_theta)) / float(np.linalg.norm(a[:, 2]))
    return 0.5 * ratio * (a[2, 0] + a[0, 2]) - float(a_theta[0])


def _check_face_growth(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """
    Under Condition 1, moving off the axis along F_2 only adds cost

    For v = s (x, 0, 1) with x in (0, 1) and every k in [0, 1], the cost on
    F_2 to v is at least the cost to k s e3. G is also convex and its right
    derivative at 0 matches the closed form.
    """
    face2 = FaceSet.of(2)
    origin = np.zeros(3)
    for n in _chunks(samples):
        params = _params(rng, *_condition1_pair(rng))
        data = rs_problem(params)
        profile = _face2_profile(data)
        base = float(profile(0.0)[0])
        x, other, k = rng.uniform(1e-6, 1.0, size=(3, n))
        k[0] = 1.0
        scale = rng.uniform(0.1, 5.0, size=n)
        values = profile(x)
        recorder.record(
            _at_least(values, base),
            "G(x) <= G(0)",
            lambda i: _instance(params, x=x[i], G=values[i], G0=base)
        )

        points = scale[:, None] * np.stack([x, np.zeros(n), np.ones(n)], axis=1)
        off_axis = np.array([reflected_cost(face2, origin, p, data) for p in points])
        on_axis = np.array([reflected_cost(face2, origin, (ki * si) * unit(3), data) for ki, si in zip(k, scale)])
        recorder.record(
            _at_least(off_axis, on_axis),
            "cost to v below the cost to k v3 e3",
            lambda i: _instance(params, v=points[i], k=k[i], cost=off_axis[i], axis_cost=on_axis[i])
        )

        mid = profile(0.5 * (x + other))
        chord = 0.5 * (values + profile(other))
        recorder.record(
            _at_least(chord, mid),
            "G not convex",
            lambda i: _instance(params, x=[x[i], other[i]], mid=mid[i], chord=chord[i])
        )

        slope = face2_slope_at_axis(data)
        h = 1e-5
        ahead = profile(np.array([h, 2.0 * h]))
        # second-order one-sided difference
        numeric = float((4.0 * ahead[0] - ahead[1] - 3.0 * base) / (2.0 * h))
        record = lambda i: _instance(params, slope=slope, numeric=numeric)
        recorder.record(slope >= -MARGIN, "slope at the axis negative", record)
        recorder.record(math.isclose(slope, numeric, rel_tol=1e-6, abs_tol=1e-8), "slope disagrees with finite difference", record)


def _check_dfo(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """
    Two-piece path reflecting on F_2 to (x, 0, 1) then direct to (0, p, q) is beaten

    Cases: r2 >= r1 with x < 1 (swap onto F_1), x >= 1 (rotate onto F_1),
    and r1 > r2 under Condition 1 with x < 1 (go through k e3).
    """
    face1, face2 = FaceSet.of(1), FaceSet.of(2)
    e3 = unit(3)
    k_grid = np.linspace(0.0, 1.0, max(cfg.grid_resolution, 8) * 8)
    for case in (1, 2, 3):
        for n in _chunks(samples // 3 + (1 if case <= samples % 3 else 0)):
            if case == 1:
                r2, r1 = sorted(_nonnegative_pair(rng), reverse=True)
            elif case == 2:
                r1, r2 = _nonnegative_pair(rng)
            else:
                r1, r2 = _condition1_pair(rng)
            params = _params(rng, r1, r2)
            data = rs_problem(params)

            x = rng.uniform(1e-3, 1.0, size=n) if case != 2 else rng.uniform(1.0, 3.0, size=n)
            q = rng.uniform(0.05, 2.0, size=n)
            p = rng.uniform(0.0, 1.0, size=n) * q
            v = _on_face(2, x, np.ones(n))
            target = _on_face(1, p, q)
            original = one_piece_costs(data, face2, v)[0] + direct_costs(data, target - v)

            if case == 1:
                swapped = _on_face(1, x, np.ones(n))
                replaced = one_piece_costs(data, face1, swapped)[0] + direct_costs(data, target - swapped)
            elif case == 2:
                rotated = _on_face(1, np.ones(n), x)
                replaced = one_piece_costs(data, face1, rotated)[0] + direct_costs(data, target - rotated)
            else:
                axis_rate = float(one_piece_costs(data, face2, e3)[0][0])
                replaced = np.empty(n)
                for i in range(n):
                    ks = np.concatenate([k_grid, [1.0, 1.0 - r2 * x[i]]])
                    ks = ks[(ks >= 0.0) & (ks <= 1.0)]
                    legs = one_piece_costs(data, face1, target[i] - np.outer(ks, e3))[0]
                    replaced[i] = float(np.min(axis_rate * ks + legs))

            recorder.record(
                _at_least(original, replaced),
                f"case {case}: replacement not cheaper",
                lambda i: _instance(params, case=case, v=v[i], target=target[i], original=original[i], replaced=replaced[i])
            )


def _check_exotic_slope(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """
    Sliding both F_3 pivots of u' -> v' -> u -> v by (-x, -x, 0) lowers cost at x = 0

    v = (v1, 0, v3), u = (u1, u2, 0), v' = k (v3, v1, 0), u' = k (0, u1, u2).
    """
    shift = np.array([1.0, 1.0, 0.0])
    for n in _chunks(samples):
        params = _params(rng, *_nonnegative_pair(rng), general=True)
        data = rs_problem(params)
        inverse = rs_gamma_inverse(params.sigma2, params.rho)
        v1, v3, u1, u2 = rng.uniform(0.1, 2.0, size=(4, n))
        k = rng.uniform(0.05, 0.95, size=n)
        v = _on_face(2, v1, v3)
        u = _on_face(3, u1, u2)
        inner_v = k[:, None] * _on_face(3, v3, v1)
        inner_u = k[:, None] * _on_face(1, u1, u2)

        def cost(x: np.ndarray) -> np.ndarray:
            moved = x[:, None] * shift
            return direct_costs(data, inner_v - moved - inner_u) + direct_costs(data, v - (u - moved))

        h = 1e-5 * np.maximum(1.0, np.max(v, axis=1))
        numeric = (cost(h) - cost(-h)) / (2.0 * h)
        distance = np.array([norm(v[i] - u[i], data) for i in range(n)])
        closed = -(data.theta_norm / distance) * (inverse.gamma0 - inverse.gamma1) * (u2 + v3) / params.sigma2

        agree = np.array([math.isclose(closed[i], numeric[i], rel_tol=1e-5, abs_tol=1e-9) for i in range(n)])
        instance = lambda i: _instance(params, v=v[i], u=u[i], k=k[i], closed=closed[i], numeric=numeric[i])
        recorder.record(closed < 0, "closed-form slope not negative", instance)
        recorder.record(agree, "closed-form slope disagrees with finite difference", instance)


def _check_reflected_convexity(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """Reflected then direct on one face never beats the single reflected segment"""
    for n in _chunks(samples):
        params = _params(rng, *_nonnegative_pair(rng))
        data = rs_problem(params)
        face = int(rng.integers(1, 4))
        face_set = FaceSet.of(face)
        p1, p2, p3 = (_on_face(face, *rng.uniform(0.0, 2.0, size=(2, n))) for _ in range(3))
        two = one_piece_costs(data, face_set, p2 - p1)[0] + direct_costs(data, p3 - p2)
        one = one_piece_costs(data, face_set, p3 - p1)[0]
        recorder.record(
            _at_least(two, one),
            "single reflected segment costs more",
            lambda i: _instance(params, face=face, points=[p1[i], p2[i], p3[i]], two=two[i], one=one[i])
        )


def _check_bad_faces(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """
    For v3 >= v2 >= v1 > 0, pivots on the nearer faces are no worse

    direct((a,b,0), v) >= direct((0,a,b), v) and, when v2 >= v1,
    direct((b,0,a), v) >= direct((0,b,a), v).
    """
    for n in _chunks(samples):
        params = _params(rng, *_nonnegative_pair(rng), general=True)
        data = rs_problem(params)
        v = np.sort(rng.uniform(0.01, 2.0, size=(n, 3)), axis=1)
        ab = rng.uniform(0.0, 2.0, size=(n, 2))
        ab[np.all(ab == 0.0, axis=1), 0] = 1.0
        a, b = ab[:, 0], ab[:, 1]
        zero = np.zeros(n)
        far = direct_costs(data, v - np.stack([a, b, zero], axis=1))
        near = direct_costs(data, v - np.stack([zero, a, b], axis=1))
        mirror_far = direct_costs(data, v - np.stack([b, zero, a], axis=1))
        mirror_near = direct_costs(data, v - np.stack([zero, b, a], axis=1))
        instance = lambda i: _instance(params, v=v[i], a=a[i], b=b[i])
        recorder.record(_at_least(far, near), "far face cheaper than F_1", instance)
        recorder.record(_at_least(mirror_far, mirror_near), "mirror pivot on F_2 cheaper than F_1", instance)


# ==========================================
# STRUCTURE CHECKS
# ==========================================

def _check_gamma_order(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """gamma0 > gamma1 and the closed-form inverse matches a numeric one"""
    for n in _chunks(samples):
        sigma2 = rng.uniform(0.25, 4.0, size=n)
        rho = rng.uniform(-0.49, 0.99, size=n)
        ok, exact = np.empty(n, dtype=bool), np.empty(n, dtype=bool)
        for i in range(n):
            inverse = rs_gamma_inverse(float(sigma2[i]), float(rho[i]))
            numeric = np.linalg.inv(rs_covariance(float(sigma2[i]), float(rho[i])))
            ok[i] = inverse.gamma0 > inverse.gamma1
            exact[i] = np.allclose(inverse.matrix(), numeric, rtol=1e-8, atol=1e-8 * float(np.max(np.abs(numeric))))
        instance = lambda i: {"sigma2": float(sigma2[i]), "rho": float(rho[i])}
        recorder.record(ok, "gamma0 <= gamma1", instance)
        recorder.record(exact, "closed-form Gamma inverse mismatch", instance)


def _check_r_inverse(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """R^-1 R = I for the circulant closed form"""
    for n in _chunks(samples):
        pairs = rng.uniform(-0.9, 2.0, size=(n, 2))
        for r1, r2 in pairs:
            r1, r2 = float(r1), float(r2)
            if abs(1.0 + r1 ** 3 + r2 ** 3 - 3.0 * r1 * r2) < 1e-3:
                recorder.skip()
                continue
            try:
                inverse = rs_r_inverse(r1, r2).matrix()
            except SingularMatrixError:
                recorder.skip()
                continue
            product = inverse @ rs_reflection(r1, r2)
            ok = np.allclose(product, np.eye(3), rtol=0.0, atol=1e-8 * max(1.0, float(np.max(np.abs(inverse)))))
            recorder.record(ok, "R^-1 R != I", lambda i: {"r1": r1, "r2": r2})


def _check_homogeneity(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """Costs scale linearly with the displacement"""
    for n in _chunks(samples):
        params = _params(rng, *_nonnegative_pair(rng))
        data = rs_problem(params)
        faces = FACE_SETS[int(rng.integers(0, len(FACE_SETS)))]
        d = rng.uniform(0.0, 2.0, size=(n, 3))
        d[:, faces.zero_based] = 0.0
        k = rng.uniform(0.1, 3.0, size=n)
        base = one_piece_costs(data, faces, d)[0]
        scaled = one_piece_costs(data, faces, k[:, None] * d)[0]
        ok = np.abs(scaled - k * base) <= 1e-9 * np.maximum(1.0, k * base)
        recorder.record(ok, "cost not homogeneous", lambda i: _instance(params, faces=list(faces.indices), d=d[i], k=k[i]))


def _check_rotation(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """Costs are unchanged by a cyclic relabelling of coordinates and faces"""
    for n in _chunks(samples):
        params = _params(rng, *_nonnegative_pair(rng))
        data = rs_problem(params)
        general = rs_problem(_params(rng, params.r1, params.r2, general=True))
        faces = FACE_SETS[int(rng.integers(0, len(FACE_SETS)))]
        shift = int(rng.integers(1, 3))
        d = rng.uniform(0.0, 2.0, size=(n, 3))
        d[:, faces.zero_based] = 0.0
        turned = rotate_vector(d, shift)

        base = one_piece_costs(data, faces, d)[0]
        moved = one_piece_costs(data, faces.rotate(shift), turned)[0]
        direct_base = direct_costs(general, d)
        direct_moved = direct_costs(general, turned)
        close = lambda x, y: np.abs(x - y) <= 1e-9 * np.maximum(1.0, np.abs(x))
        instance = lambda i: _instance(params, faces=list(faces.indices), shift=shift, d=d[i])
        recorder.record(close(base, moved), "one-piece cost changed under rotation", instance)
        recorder.record(close(direct_base, direct_moved), "direct cost changed under rotation", instance)


def _check_equivalence(rng: np.random.Generator, samples: int, cfg: OracleConfig, recorder: _Recorder) -> None:
    """
    Closed-form costs agree with the numeric segment oracle

    Draws until ``samples`` instances where reflectivity holds have been
    compared; failed-reflectivity draws are counted as skipped. Draws are
    capped at EQUIVALENCE_DRAW_FACTOR per requested instance.
    """
    compared = 0
    draws = 0
    cap = EQUIVALENCE_DRAW_FACTOR * samples
    while compared < samples and draws < cap:
        faces = FACE_SETS[int(rng.integers(0, len(FACE_SETS)))]
        params = _params(rng, *_nonnegative_pair(rng), general=not len(faces))
        data = rs_problem(params)
        wanted = min(CHUNK, samples - compared)
        attempts = 0
        while wanted and attempts < EQUIVALENCE_DRAW_FACTOR * CHUNK and draws < cap:
            attempts += 1
            draws += 1
            w, v = rng.uniform(0.0, 2.0, size=(2, 3))
            w[faces.zero_based] = 0.0
            v[faces.zero_based] = 0.0
            if len(faces) and not reflectivity_check(faces, v, data, w=w)[1]:
                recorder.skip()
                continue
            wanted -= 1
            compared += 1
            closed = reflected_cost(faces, w, v, data)
            instance = lambda i: _instance(params, faces=list(faces.indices), w=w, v=v, closed=closed)
            try:
                numeric = segment_cost_oracle(w, v, faces, data)
            except OptimizationError as exc:
                recorder.record(False, exc.message, instance)
                continue
            agree = abs(numeric - closed) / max(1.0, abs(closed)) < cfg.tolerance
            recorder.record(agree, f"oracle {numeric:.12g} vs closed form {closed:.12g}", instance)

    if compared < samples:
        recorder.record(
            False,
            f"only {compared} of {samples} instances satisfied reflectivity within {cap} draws",
            lambda i: {"compared": compared, "requested": samples, "draws": draws}
        )


# ==========================================
# SUITE
# ==========================================

CHECKS: List[Tuple[str, Callable[..., None]]] = [
    ("switchback", _check_switchback),
    ("axis_eliminate", _check_axis_eliminate),
    ("different_r", _check_different_r),
    ("face_growth", _check_face_growth),
    ("dfo", _check_dfo),
    ("exotic_slope", _check_exotic_slope),
    ("reflected_convexity", _check_reflected_convexity),
    ("bad_faces", _check_bad_faces),
    ("gamma_order", _check_gamma_order),
    ("r_inverse_identity", _check_r_inverse),
    ("homogeneity", _check_homogeneity),
    ("rotation_invariance", _check_rotation),
    ("oracle_equivalence", _check_equivalence),
]

ADVERSARIAL_CHECKS: List[Tuple[str, Callable[..., None]]] = [
    ("different_r_reversed", _check_different_r_reversed),
]


def _run(checks: List[Tuple[str, Callable[..., None]]], cfg: OracleConfig, expected: bool = False, offset: int = 0):
    summaries: List[CheckSummary] = []
    violations: List[ViolationRecord] = []
    for index, (name, check) in enumerate(checks, start=offset):
        rng = np.random.default_rng([cfg.seed, index])
        samples = cfg.equivalence_samples if name == "oracle_equivalence" else cfg.samples
        recorder = _Recorder(name, expected_violations=expected)
        check(rng, samples, cfg, recorder)
        logger.info(
            "%s: %d passed, %d failed, %d skipped",
            name, recorder.summary.passed, recorder.summary.failed, recorder.summary.skipped
        )
        summaries.append(recorder.summary)
        violations.extend(recorder.violations)
    return summaries, violations


def lemma_suite(cfg: Optional[OracleConfig] = None) -> OracleReport:
    """
    Seeded randomized verification of every path-comparison inequality

    Each check draws from its own generator seeded by (seed, check index),
    so the report is deterministic for a given config. Adversarial mode
    adds checks whose hypotheses are deliberately violated; their failures
    are expected and excluded from ``violation_count``.
    """
    cfg = cfg or OracleConfig()
    summaries, violations = _run(CHECKS, cfg)
    if cfg.adversarial:
        extra, extra_violations = _run(ADVERSARIAL_CHECKS, cfg, expected=True, offset=len(CHECKS))
        summaries.extend(extra)
        violations.extend(extra_violations)
    report = OracleReport(seed=cfg.seed, config=cfg, checks=summaries, violations=violations, adversarial=cfg.adversarial)
    if report.violation_count:
        logger.warning("lemma suite: %d violations", report.violation_count)
    return report


def oracle_equivalence(cfg: Optional[OracleConfig] = None) -> OracleReport:
    """Closed form vs numeric segment oracle on ``cfg.equivalence_samples`` instances"""
    cfg = cfg or OracleConfig()
    index = next(i for i, (name, _) in enumerate(CHECKS) if name == "oracle_equivalence")
    summaries, violations = _run([CHECKS[index]], cfg, offset=index)
    return OracleReport(seed=cfg.seed, config=cfg, checks=summaries, violations=violations)


def condition1_survey(step: float = 0.05) -> SurveyReport:
    """
    How often Condition 1 holds on the stable grid with r1 > r2 >= 0

    Reported only; failures are listed, never raised.
    """
    if not 0 < step < 1:
        raise InvalidProblemData(f"survey step must lie in (0, 1), got {step}")
    grid = np.arange(0.0, 2.0, step)
    stable_cells = 0
    holds = 0
    failures: List[Tuple[float, float]] = []
    for r1 in grid:
        for r2 in grid[grid < r1]:
            if not closed_form_stable(RsParams(theta0=-1.0, r1=float(r1), r2=float(r2))):
                continue
            stable_cells += 1
            if condition1(float(r1), float(r2)):
                holds += 1
            else:
                failures.append((round(float(r1), 12), round(float(r2), 12)))
    logger.info("condition 1 survey: %d of %d stable cells", holds, stable_cells)
    return SurveyReport(step=step, stable_cells=stable_cells, condition1_cells=holds, failures=failures)


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "segment_cost_oracle",
    "enumerate_gradual",
    "face2_slope_at_axis",
    "lemma_suite",
    "oracle_equivalence",
    "condition1_survey",
    "CHECKS"
]
