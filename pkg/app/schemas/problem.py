"""
Problem data schemas
Rotationally symmetric parameters and the general (theta, Gamma, R) input form
"""

from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import List


# ==========================================
# ROTATIONALLY SYMMETRIC PARAMETERS
# ==========================================

class RsParams(BaseModel):
    """
    Rotationally symmetric data (theta0, r1, r2, sigma2, rho)

    Expands to theta = theta0 (1,1,1), Gamma = sigma2 [(1-rho) I + rho J]
    and the circulant reflection matrix with off-diagonals r1, r2.
    """
    model_config = ConfigDict(frozen=True)

    theta0: float = Field(..., description="Common drift component")
    r1: float = Field(..., description="Reflection entry R[1,0] (and its rotations)")
    r2: float = Field(..., description="Reflection entry R[0,1] (and its rotations)")
    sigma2: float = Field(1.0, description="Common variance")
    rho: float = Field(0.0, description="Common correlation")

    @field_validator("sigma2")
    @classmethod
    def sigma2_positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("sigma2 must be > 0")
        return value

    @field_validator("rho")
    @classmethod
    def rho_positive_definite(cls, value: float) -> float:
        # Gamma has eigenvalues sigma2 (1 + 2 rho) and sigma2 (1 - rho)
        if not -0.5 < value < 1.0:
            raise ValueError("rho must lie in (-1/2, 1) for Gamma to be positive definite")
        return value

    @property
    def identity_covariance(self) -> bool:
        return self.sigma2 == 1.0 and self.rho == 0.0

    def scaled_drift(self, factor: float) -> "RsParams":
        return self.model_copy(update={"theta0": self.theta0 * factor})

    def mirrored(self) -> "RsParams":
        """Swap r1 and r2 (coordinate 1/2 mirror image of the data)"""
        return self.model_copy(update={"r1": self.r2, "r2": self.r1})


# ==========================================
# GENERAL INPUT
# ==========================================

class GeneralProblemInput(BaseModel):
    """General problem data as read from JSON"""
    theta: List[float] = Field(..., min_length=3, max_length=3)
    Gamma: List[List[float]] = Field(..., min_length=3, max_length=3)
    R: List[List[float]] = Field(..., min_length=3, max_length=3)

    @field_validator("Gamma", "R")
    @classmethod
    def three_by_three(cls, rows: List[List[float]]) -> List[List[float]]:
        if any(len(row) != 3 for row in rows):
            raise ValueError("matrix rows must have length 3")
        return rows


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "RsParams",
    "GeneralProblemInput"
]
