"""
Problem Geometry
Problem data, the Gamma-weighted inner product and closed-form RS inverses
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import InvalidProblemData, SingularMatrixError
from app.schemas.problem import GeneralProblemInput, RsParams

logger = logging.getLogger(__name__)


# ==========================================
# VALUE TYPES
# ==========================================

def _frozen_array(values: Any, shape: tuple, name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.shape != shape:
        raise InvalidProblemData(f"{name} must have shape {shape}, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidProblemData(f"{name} must be finite")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ProblemData:
    """
    The triple (theta, Gamma, R)

    Columns of ``r`` are the reflection vectors R1, R2, R3. Construction
    fails unless Gamma is symmetric and strictly positive definite.
    """
    theta: np.ndarray
    gamma: np.ndarray
    r: np.ndarray
    params: Optional[RsParams] = None
    _cache: Dict[Any, Any] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "theta", _frozen_array(self.theta, (3,), "theta"))
        object.__setattr__(self, "gamma", _frozen_array(self.gamma, (3, 3), "Gamma"))
        object.__setattr__(self, "r", _frozen_array(self.r, (3, 3), "R"))

        scale = max(1.0, float(np.max(np.abs(self.gamma))))
        if not np.allclose(self.gamma, self.gamma.T, rtol=0.0, atol=settings.MATRIX_RTOL * scale):
            raise InvalidProblemData("Gamma must be symmetric", {"Gamma": self.gamma.tolist()})
        eigenvalues = np.linalg.eigvalsh(self.gamma)
        if eigenvalues[0] <= 0:
            raise InvalidProblemData(
                "Gamma must be strictly positive definite",
                {"eigenvalues": eigenvalues.tolist()}
            )

    def cached(self, key: Any, factory: Callable[[], Any]) -> Any:
        """Memoize a derived quantity on this (immutable) instance"""
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]

    @property
    def gamma_inv(self) -> np.ndarray:
        return self.cached("gamma_inv", lambda: np.linalg.inv(self.gamma))

    @property
    def identity_covariance(self) -> bool:
        return self.cached(
            "identity_covariance",
            lambda: bool(np.allclose(self.gamma, np.eye(3), rtol=0.0, atol=settings.MATRIX_RTOL))
        )

    @property
    def theta_norm(self) -> float:
        return self.cached("theta_norm", lambda: norm(self.theta, self))


@dataclass(frozen=True)
class GammaInverse:
    """Gamma^-1 = sigma^-2 * (gamma0 on the diagonal, gamma1 off it)"""
    gamma0: float
    gamma1: float
    sigma2: float = 1.0

    def matrix(self) -> np.ndarray:
        off = np.full((3, 3), self.gamma1)
        np.fill_diagonal(off, self.gamma0)
        return off / self.sigma2


@dataclass(frozen=True)
class RInverse:
    """Circulant entries of R^-1: rows (a,b,c), (c,a,b), (b,c,a)"""
    a: float
    b: float
    c: float

    def matrix(self) -> np.ndarray:
        return circulant(self.a, self.b, self.c)


# ==========================================
# CONSTRUCTION
# ==========================================

def circulant(a: float, b: float, c: float) -> np.ndarray:
    """Rows (a,b,c), (c,a,b), (b,c,a)"""
    return np.array([[a, b, c], [c, a, b], [b, c, a]], dtype=float)


def rs_reflection(r1: float, r2: float) -> np.ndarray:
    """Circulant reflection matrix; columns (1,r1,r2), (r2,1,r1), (r1,r2,1)"""
    return circulant(1.0, r2, r1)


def rs_covariance(sigma2: float, rho: float) -> np.ndarray:
    return sigma2 * ((1.0 - rho) * np.eye(3) + rho * np.ones((3, 3)))


def rs_problem(params: RsParams) -> ProblemData:
    """Expand RS parameters into (theta, Gamma, R)"""
    return ProblemData(
        theta=np.full(3, params.theta0),
        gamma=rs_covariance(params.sigma2, params.rho),
        r=rs_reflection(params.r1, params.r2),
        params=params
    )


def load_problem(payload: Dict[str, Any]) -> ProblemData:
    """
    Parse either JSON problem form

    Args:
        payload: {"theta0","r1","r2","sigma2","rho"} or {"theta","Gamma","R"}

    Returns:
        ProblemData (with ``params`` set for the RS form)
    """
    try:
        if "theta0" in payload:
            return rs_problem(RsParams.model_validate(payload))
        if "theta" in payload:
            general = GeneralProblemInput.model_validate(payload)
            return ProblemData(theta=general.theta, gamma=general.Gamma, r=general.R)
    except ValidationError as exc:
        raise InvalidProblemData("Invalid problem data", {"errors": exc.errors(include_url=False)}) from exc
    raise InvalidProblemData(
        "Problem JSON needs either theta0/r1/r2 or theta/Gamma/R keys",
        {"keys": sorted(payload)}
    )


# ==========================================
# INNER PRODUCT & NORM
# ==========================================

def inner(v: np.ndarray, w: np.ndarray, data: ProblemData) -> float:
    """<v, w> = v' Gamma^-1 w"""
    return float(np.asarray(v, dtype=float) @ data.gamma_inv @ np.asarray(w, dtype=float))


def norm(v: np.ndarray, data: ProblemData) -> float:
    return float(np.sqrt(max(inner(v, v, data), 0.0)))


def row_norms(vectors: np.ndarray, data: ProblemData) -> np.ndarray:
    """Gamma-norms of the rows of an (N, 3) array"""
    squared = np.einsum("ij,jk,ik->i", vectors, data.gamma_inv, vectors)
    return np.sqrt(np.maximum(squared, 0.0))


# ==========================================
# RS INVERSES
# ==========================================

def rs_gamma_inverse(sigma2: float, rho: float) -> GammaInverse:
    """
    Solve gamma0 + 2 rho gamma1 = 1, gamma1 + rho (gamma0 + gamma1) = 0

    Raises:
        InvalidProblemData: sigma2 <= 0 or rho outside (-1/2, 1)
    """
    if not sigma2 > 0:
        raise InvalidProblemData("sigma2 must be > 0", {"sigma2": sigma2})
    if not -0.5 < rho < 1.0:
        raise InvalidProblemData(
            "rho outside (-1/2, 1): Gamma is not positive definite",
            {"rho": rho}
        )
    system = np.array([[1.0, 2.0 * rho], [rho, 1.0 + rho]])
    gamma0, gamma1 = np.linalg.solve(system, np.array([1.0, 0.0]))
    return GammaInverse(gamma0=float(gamma0), gamma1=float(gamma1), sigma2=sigma2)


def rs_r_inverse(r1: float, r2: float) -> RInverse:
    """
    Circulant inverse of the RS reflection matrix

    Raises:
        SingularMatrixError: det R = 0 (e.g. r1 = r2 = 1 or 1 + r1 + r2 = 0)
    """
    # rows are the coefficients of (a, b, c) in R^-1 R = I, first column
    system = np.array([[1.0, r1, r2], [r2, 1.0, r1], [r1, r2, 1.0]])
    determinant = 1.0 + r1 ** 3 + r2 ** 3 - 3.0 * r1 * r2
    if abs(determinant) <= settings.MATRIX_RTOL * max(1.0, abs(r1), abs(r2)) ** 3:
        raise SingularMatrixError(
            "R is singular (1 + r1^3 + r2^3 - 3 r1 r2 = 0)",
            {"r1": r1, "r2": r2, "det": determinant}
        )
    a, b, c = np.linalg.solve(system, np.array([1.0, 0.0, 0.0]))
    return RInverse(a=float(a), b=float(b), c=float(c))


# ==========================================
# STRUCTURE CHECKS
# ==========================================

def is_skew_symmetric(data: ProblemData) -> bool:
    """2 Gamma = R D^-1 Lambda + Lambda D^-1 R' entrywise"""
    diagonal = np.diag(data.r)
    if np.any(np.abs(diagonal) <= settings.MATRIX_RTOL):
        raise SingularMatrixError("R has a zero diagonal entry", {"diag": diagonal.tolist()})
    d_inv = np.diag(1.0 / diagonal)
    lam = np.diag(np.diag(data.gamma))
    rhs = data.r @ d_inv @ lam + lam @ d_inv @ data.r.T
    scale = max(1.0, float(np.max(np.abs(rhs))))
    return bool(np.allclose(2.0 * data.gamma, rhs, rtol=0.0, atol=settings.MATRIX_RTOL * scale))


def is_rotationally_symmetric(data: ProblemData) -> bool:
    """Constant drift, circulant R, equicorrelated Gamma"""
    def invariant(matrix: np.ndarray) -> bool:
        shifted = np.roll(np.roll(matrix, 1, axis=0), 1, axis=1)
        return bool(np.allclose(matrix, shifted, rtol=0.0, atol=settings.MATRIX_RTOL))

    theta_constant = bool(np.allclose(data.theta, data.theta[0], rtol=0.0, atol=settings.MATRIX_RTOL))
    return theta_constant and invariant(data.r) and invariant(data.gamma)


# ==========================================
# COORDINATE MAPS
# ==========================================

def rotate_vector(v: np.ndarray, shift: int) -> np.ndarray:
    """shift 1: (a,b,c) -> (b,c,a); shift 2: (a,b,c) -> (c,a,b)"""
    return np.roll(np.asarray(v, dtype=float), -shift, axis=-1)


def mirror_vector(v: np.ndarray) -> np.ndarray:
    """(a,b,c) -> (b,a,c)"""
    return np.asarray(v, dtype=float)[..., [1, 0, 2]]


def as_point(values: Any, name: str = "point") -> np.ndarray:
    point = np.asarray(values, dtype=float)
    if point.shape != (3,) or not np.all(np.isfinite(point)):
        raise InvalidProblemData(f"{name} must be a finite 3-vector", {name: np.asarray(values).tolist()})
    return point


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "ProblemData",
    "GammaInverse",
    "RInverse",
    "circulant",
    "rs_reflection",
    "rs_covariance",
    "rs_problem",
    "load_problem",
    "inner",
    "norm",
    "row_norms",
    "rs_gamma_inverse",
    "rs_r_inverse",
    "is_skew_symmetric",
    "is_rotationally_symmetric",
    "rotate_vector",
    "mirror_vector",
    "as_point"
]
