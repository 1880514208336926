"""
Report schemas for JSON output
Stability, classification, spiral, cost, oracle and reproduction reports
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


# ==========================================
# ENUMS
# ==========================================

class LcpKind(str, Enum):
    STABLE = "Stable"
    DIVERGENT = "Divergent"


class Region(str, Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    SINGULAR_POINT = "SingularPoint"


class Orientation(str, Enum):
    VIA_F2 = "ViaF2"
    VIA_F1 = "ViaF1"


class Verdict(str, Enum):
    GRADUAL_OPTIMAL = "GradualOptimal"
    SPIRAL_OPTIMAL = "SpiralOptimal"
    INCONCLUSIVE = "Inconclusive"


class Provenance(str, Enum):
    CLOSED_FORM = "closed_form"
    NUMERIC = "numeric"


# ==========================================
# STABILITY
# ==========================================

class LcpSolution(BaseModel):
    """Complementary pair u, v >= 0 with v = theta + R u"""
    u: List[float]
    v: List[float]
    kind: LcpKind
    support: List[int] = Field(..., description="1-based indices with u_i free")


class StabilityReport(BaseModel):
    """Decision-flow and closed-form stability verdicts"""
    completely_s: bool
    p_matrix: bool
    drift_condition: Optional[bool] = Field(None, description="R^-1 theta < 0 (absent when R is singular)")
    region: Region
    beta: Optional[float] = None
    on_boundary: bool = False
    lcp_checked: bool = Field(False, description="LCP enumerated (the beta test decides open C1/C2 without it)")
    lcp_solutions: List[LcpSolution] = []
    lcp_degenerate_supports: List[List[int]] = []
    stable: bool
    closed_form_stable: bool

    @property
    def agrees(self) -> bool:
        return self.stable == self.closed_form_stable


# ==========================================
# PATH VALIDATION
# ==========================================

class Violation(BaseModel):
    segment: int = Field(..., description="0-based segment index, -1 for the origin")
    condition: str
    detail: str


class ValidationReport(BaseModel):
    valid: bool
    violations: List[Violation] = []

    @property
    def first(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None


# ==========================================
# COSTS
# ==========================================

class CostEntry(BaseModel):
    """One named cost value for a query point"""
    family: str
    faces: List[int] = []
    via: Optional[int] = None
    value: float
    provenance: Provenance = Provenance.CLOSED_FORM
    attained: bool = True
    argmin: Optional[List[float]] = None
    reflectivity: Optional[List[float]] = None


class CostReport(BaseModel):
    point: List[float]
    start: List[float] = [0.0, 0.0, 0.0]
    entries: List[CostEntry] = []


# ==========================================
# SOLVER
# ==========================================

class ReflectivityResult(BaseModel):
    faces: List[int]
    vector: List[float]
    holds: bool


class SpiralSummary(BaseModel):
    orientation: Orientation
    k_star: float
    per_turn_cost: float
    total_cost: float
    truncation_turns: int
    tail_bound: float
    path_cost: float


class WitnessRecord(BaseModel):
    """Cost comparison behind the verdict"""
    axis_cost: float
    alternatives: Dict[str, float] = Field(default_factory=dict, description="Two-piece axis-then-face cost to e3 per orientation")
    alternative_argmins: Dict[str, float] = Field(default_factory=dict)
    probe_costs: Dict[str, float] = Field(default_factory=dict, description="Two-piece cost through the half-unit axis point")
    spiral_condition: Dict[str, bool] = Field(default_factory=dict)
    spiral_costs: Dict[str, Optional[float]] = Field(default_factory=dict)
    reason: Optional[str] = Field(default=None, description="Why the verdict is Inconclusive")


class ClassificationReport(BaseModel):
    params: Dict[str, float]
    stability: StabilityReport
    condition1: bool
    condition1_margin: Optional[float] = None
    dichotomy_holds: bool
    reflectivity: List[ReflectivityResult]
    axis_cost: float
    spiral: Optional[SpiralSummary] = None
    verdict: Verdict
    witness: WitnessRecord


class BestPathReport(BaseModel):
    point: List[float]
    cost: float
    family: str
    inconclusive: bool
    path: Dict[str, Any]


# ==========================================
# ORACLE
# ==========================================

class OracleConfig(BaseModel):
    seed: int = 42
    samples: int = 10000
    grid_resolution: int = 16
    tolerance: float = 1e-6
    equivalence_samples: int = 1000
    adversarial: bool = False

    @field_validator("samples")
    @classmethod
    def samples_positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("samples must be > 0")
        return value

    @field_validator("grid_resolution")
    @classmethod
    def grid_fine_enough(cls, value: int) -> int:
        if value < 8:
            raise ValueError("grid_resolution must be >= 8")
        return value


class CheckSummary(BaseModel):
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    expected_violations: bool = False


class ViolationRecord(BaseModel):
    check: str
    instance: Dict[str, Any]
    detail: str


class OracleReport(BaseModel):
    seed: int
    config: OracleConfig
    checks: List[CheckSummary]
    violations: List[ViolationRecord] = []
    adversarial: bool = False

    @property
    def violation_count(self) -> int:
        return sum(check.failed for check in self.checks if not check.expected_violations)


class SurveyReport(BaseModel):
    step: float
    stable_cells: int
    condition1_cells: int
    failures: List[Tuple[float, float]] = []


# ==========================================
# CLI
# ==========================================

class SweepSpec(BaseModel):
    r1_range: Tuple[float, float, int]
    r2_range: Tuple[float, float, int]
    theta0: float = -1.0
    output: str

    @model_validator(mode="after")
    def ranges_valid(self) -> "SweepSpec":
        for name, (low, high, steps) in (("r1_range", self.r1_range), ("r2_range", self.r2_range)):
            if steps < 2:
                raise ValueError(f"{name} needs at least 2 steps")
            if not (abs(low) < float("inf") and abs(high) < float("inf")):
                raise ValueError(f"{name} must be finite")
        return self


class ReproductionRow(BaseModel):
    quantity: str
    quoted: Optional[Any] = None
    computed: Any
    passed: Optional[bool] = Field(None, description="Absent for informational rows")


class ReproductionReport(BaseModel):
    params: Dict[str, float]
    tolerance: float
    rows: List[ReproductionRow]

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows if row.passed is not None)


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "LcpKind",
    "Region",
    "Orientation",
    "Verdict",
    "Provenance",
    "LcpSolution",
    "StabilityReport",
    "Violation",
    "ValidationReport",
    "CostEntry",
    "CostReport",
    "ReflectivityResult",
    "SpiralSummary",
    "WitnessRecord",
    "ClassificationReport",
    "BestPathReport",
    "OracleConfig",
    "CheckSummary",
    "ViolationRecord",
    "OracleReport",
    "SurveyReport",
    "SweepSpec",
    "ReproductionRow",
    "ReproductionReport"
]
