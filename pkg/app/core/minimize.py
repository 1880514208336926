"""
Derivative-free minimization
Coarse scans, golden-section refinement and grid zooming for convex-in-practice objectives
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from app.core.config import settings
from app.core.exceptions import OptimizationError

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2

VectorObjective = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    value: float
    evaluations: int
    at_lower_edge: bool = False


# ==========================================
# 1-D
# ==========================================

def golden_section(f: Callable[[float], float], a: float, b: float, tol: float) -> MinimizeResult:
    """
    Golden-section search on [a, b]

    Assumes a single local minimum in the bracket and shrinks it to
    width <= tol. Returns the better of the two final interior points.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return MinimizeResult(np.array([x]), float(f(x)), 1)

    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(max(steps - 1, 0)):
        if yc <= yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    x, y = (c, yc) if yc <= yd else (d, yd)
    return MinimizeResult(np.array([x]), float(y), steps + 1)


def scan_then_golden(
    f: VectorObjective,
    lower: float,
    upper: float,
    points: Optional[int] = None,
    tol: Optional[float] = None,
    grid: Optional[np.ndarray] = None
) -> MinimizeResult:
    """
    Minimize a vectorized 1-D objective on [lower, upper]

    A coarse scan picks the best sample (ties go to the smaller
    parameter), golden-section then refines between its neighbours.

    Args:
        f: maps an array of parameters to an array of values
        grid: explicit scan points (overrides ``points``)

    Returns:
        MinimizeResult; ``at_lower_edge`` is set when the scan minimum is
        the first sample.
    """
    points = points or settings.SCAN_POINTS
    tol = tol or settings.GOLDEN_TOL
    xs = np.linspace(lower, upper, points) if grid is None else np.asarray(grid, dtype=float)
    values = np.asarray(f(xs), dtype=float)
    if not np.any(np.isfinite(values)):
        raise OptimizationError(
            "objective is not finite anywhere on the scan",
            {"lower": lower, "upper": upper, "points": len(xs)}
        )
    values = np.where(np.isfinite(values), values, np.inf)
    best = int(np.argmin(values))

    left = xs[max(best - 1, 0)]
    right = xs[min(best + 1, len(xs) - 1)]
    refined = golden_section(lambda x: float(f(np.array([x]))[0]), left, right, tol * max(1.0, abs(upper - lower)))
    logger.debug("scan bracket [%.6g, %.6g] -> x=%.12g", left, right, refined.x[0])

    if values[best] < refined.value:
        x, value = xs[best], float(values[best])
    else:
        x, value = float(refined.x[0]), refined.value
    return MinimizeResult(
        np.array([x]),
        value,
        len(xs) + refined.evaluations,
        at_lower_edge=best == 0
    )


# ==========================================
# N-D
# ==========================================

def grid_zoom(
    f: VectorObjective,
    lower: Sequence[float],
    upper: Sequence[float],
    initial_points: Optional[int] = None,
    zoom_points: Optional[int] = None,
    rounds: Optional[int] = None,
    tol: Optional[float] = None
) -> MinimizeResult:
    """
    Box-constrained minimization by repeated grid refinement

    The first grid uses ``initial_points`` per axis; every later round
    re-grids a box of two cells around the incumbent, clipped to the
    original bounds, until the box is narrower than ``tol`` times the
    original width. A bounded Nelder-Mead polish finishes.

    Args:
        f: maps an (N, dim) array of points to N values
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dim = lower.size
    initial_points = initial_points or settings.GRID_POINTS
    zoom_points = zoom_points or settings.ZOOM_POINTS
    rounds = rounds or settings.ZOOM_ROUNDS
    tol = tol or settings.GOLDEN_TOL
    width0 = float(np.max(upper - lower))

    lo, hi = lower.copy(), upper.copy()
    best_x: Optional[np.ndarray] = None
    best_value = np.inf
    evaluations = 0

    for round_index in range(rounds):
        n = initial_points if round_index == 0 else zoom_points
        axes = [np.linspace(lo[j], hi[j], n) for j in range(dim)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
        values = np.asarray(f(mesh), dtype=float)
        evaluations += len(mesh)
        values = np.where(np.isfinite(values), values, np.inf)
        index = int(np.argmin(values))
        if values[index] < best_value:
            best_value = float(values[index])
            best_x = mesh[index]
        if best_x is None:
            raise OptimizationError("objective is not finite on the search box", {"lower": lo.tolist(), "upper": hi.tolist()})

        step = (hi - lo) / (n - 1)
        lo = np.maximum(lower, best_x - 2.0 * step)
        hi = np.minimum(upper, best_x + 2.0 * step)
        if float(np.max(hi - lo)) <= tol * max(width0, 1.0):
            break

    polished = _polish(f, best_x, lower, upper)
    evaluations += polished.evaluations
    if polished.value < best_value:
        best_x, best_value = polished.x, polished.value
    logger.debug("grid zoom: value=%.12g after %d evaluations", best_value, evaluations)
    return MinimizeResult(np.asarray(best_x, dtype=float), best_value, evaluations)


def _polish(f: VectorObjective, x0: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> MinimizeResult:
    scalar = lambda x: float(np.asarray(f(np.atleast_2d(x)), dtype=float)[0])
    result = optimize.minimize(
        scalar,
        x0,
        method="Nelder-Mead",
        bounds=list(zip(lower, upper)),
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000}
    )
    value = float(result.fun) if np.isfinite(result.fun) else np.inf
    return MinimizeResult(np.clip(np.asarray(result.x, dtype=float), lower, upper), value, int(result.nfev))


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "MinimizeResult",
    "golden_section",
    "scan_then_golden",
    "grid_zoom"
]
