"""
Shared fixtures
Canonical worked-example data, identity reflection and a general-covariance instance
"""

import numpy as np
import pytest

from app.core.geometry import rs_problem
from app.schemas.problem import RsParams

CANONICAL = RsParams(theta0=-1.0, r1=1.5, r2=0.0)
IDENTITY_R = RsParams(theta0=-1.0, r1=0.0, r2=0.0)
CORRELATED = RsParams(theta0=-0.8, r1=0.4, r2=0.2, sigma2=2.0, rho=0.3)

# axis cost to e3 and its pushing rates for the canonical data
CANONICAL_AXIS_COST = 3.5 / 8.3125
CANONICAL_RATES = (0.4375 / 8.3125, 12.90625 / 8.3125)
# minimizer of the canonical spiral objective along ViaF2
CANONICAL_K_STAR = 26.0 / 43.0


@pytest.fixture
def canonical_params() -> RsParams:
    return CANONICAL


@pytest.fixture
def canonical():
    return rs_problem(CANONICAL)


@pytest.fixture
def identity_params() -> RsParams:
    return IDENTITY_R


@pytest.fixture
def identity():
    return rs_problem(IDENTITY_R)


@pytest.fixture
def correlated():
    return rs_problem(CORRELATED)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
