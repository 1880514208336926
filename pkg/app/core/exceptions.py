"""
Solver Exceptions
Every library failure carries the CLI exit code it maps to
"""

from typing import Any, Dict, Optional


# ==========================================
# BASE
# ==========================================

class OctantVPError(Exception):
    """Base error for the octant variational problem solver"""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.details
        }


# ==========================================
# INPUT ERRORS
# ==========================================

class InvalidProblemData(OctantVPError):
    """Malformed problem data, face set or point"""


class SingularMatrixError(OctantVPError):
    """A matrix that must be inverted is singular"""


class UnsupportedCovarianceError(OctantVPError):
    """Operation is only defined for identity covariance"""


class UsageError(OctantVPError):
    """Bad command-line arguments"""


# ==========================================
# COMPUTE ERRORS
# ==========================================

class PathValidationError(OctantVPError):
    """Regulation triple violates the Skorohod conditions"""

    def __init__(self, message: str, report: Any = None):
        details = {}
        if report is not None:
            details = report.model_dump() if hasattr(report, "model_dump") else {"report": str(report)}
        super().__init__(message, details)
        self.report = report


class OptimizationError(OctantVPError):
    """Numeric minimization failed to converge"""


class UnstableDataError(OctantVPError):
    """Data outside the stable regime"""


class SpiralDegenerateError(OctantVPError):
    """Spiral objective has no interior minimizer"""


# ==========================================
# VALIDATION ERRORS
# ==========================================

class ValidationFailure(OctantVPError):
    """Lemma suite found violations"""

    exit_code = 3


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "OctantVPError",
    "InvalidProblemData",
    "SingularMatrixError",
    "UnsupportedCovarianceError",
    "UsageError",
    "PathValidationError",
    "OptimizationError",
    "UnstableDataError",
    "SpiralDegenerateError",
    "ValidationFailure"
]
