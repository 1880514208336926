"""
Sweep Service
Phase-diagram sweep over the (r1, r2) plane, written as CSV with pandas
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
import pandas as pd

from app.core.config import worker_count
from app.core.exceptions import InvalidProblemData, OctantVPError
from app.core.solver import classify_optimal_path, condition1
from app.core.stability import classify_stability
from app.schemas.problem import RsParams
from app.schemas.reports import SweepSpec

logger = logging.getLogger(__name__)

COLUMNS = [
    "r1", "r2", "theta0", "stable", "completely_s", "p_matrix",
    "condition1", "axis_cost", "spiral_cost", "k_star", "verdict"
]


# ==========================================
# CELLS
# ==========================================

def sweep_cell(cell: Tuple[float, float, float]) -> Dict[str, Any]:
    """One CSV row; NaN marks an absent value, including the verdict of unstable or failed cells"""
    r1, r2, theta0 = cell
    params = RsParams(theta0=theta0, r1=r1, r2=r2)
    stability = classify_stability(params)
    row: Dict[str, Any] = {
        "r1": r1,
        "r2": r2,
        "theta0": theta0,
        "stable": stability.stable,
        "completely_s": stability.completely_s,
        "p_matrix": stability.p_matrix,
        "condition1": condition1(r1, r2),
        "axis_cost": np.nan,
        "spiral_cost": np.nan,
        "k_star": np.nan,
        "verdict": np.nan,
    }
    if not stability.stable:
        return row

    try:
        classification = classify_optimal_path(params)
    except OctantVPError as exc:
        logger.warning("cell (%g, %g) not classified: %s", r1, r2, exc.message)
        return row

    row["axis_cost"] = classification.axis_cost
    row["verdict"] = classification.verdict.value
    if classification.spiral is not None:
        row["spiral_cost"] = classification.spiral.total_cost
        row["k_star"] = classification.spiral.k_star
    return row


def sweep_cells(spec: SweepSpec) -> List[Tuple[float, float, float]]:
    """Grid cells ordered by (r1, r2)"""
    r1_values = np.linspace(*spec.r1_range[:2], int(spec.r1_range[2]))
    r2_values = np.linspace(*spec.r2_range[:2], int(spec.r2_range[2]))
    return [(float(r1), float(r2), spec.theta0) for r1 in r1_values for r2 in r2_values]


# ==========================================
# SWEEP
# ==========================================

def run_sweep(spec: SweepSpec) -> pd.DataFrame:
    cells = sweep_cells(spec)
    workers = worker_count()
    logger.info("sweeping %d cells with %d worker(s)", len(cells), workers)
    if workers == 1:
        rows = [sweep_cell(cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(sweep_cell, cells, chunksize=max(1, len(cells) // (4 * workers))))
    return pd.DataFrame(rows, columns=COLUMNS)


def write_sweep_csv(frame: pd.DataFrame, output: Path) -> None:
    try:
        frame.to_csv(output, index=False, na_rep="", float_format="%.12g")
    except OSError as exc:
        raise InvalidProblemData(f"cannot write {output}: {exc.strerror}") from exc


__all__ = [
    "COLUMNS",
    "sweep_cell",
    "sweep_cells",
    "run_sweep",
    "write_sweep_csv"
]
