"""Problem data, RS inverses and coordinate maps"""

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st

from app.core.exceptions import InvalidProblemData, SingularMatrixError
from app.core.geometry import (
    ProblemData,
    inner,
    is_rotationally_symmetric,
    is_skew_symmetric,
    load_problem,
    mirror_vector,
    norm,
    rotate_vector,
    row_norms,
    rs_covariance,
    rs_gamma_inverse,
    rs_problem,
    rs_r_inverse,
    rs_reflection,
)
from app.schemas.problem import RsParams
from tests.conftest import CANONICAL, CORRELATED

ATOL = 1e-12


class TestProblemData:
    def test_rs_expansion(self, canonical):
        np.testing.assert_allclose(canonical.theta, [-1.0, -1.0, -1.0])
        np.testing.assert_allclose(canonical.gamma, np.eye(3))
        # columns are the reflection directions
        np.testing.assert_allclose(canonical.r[:, 0], [1.0, 1.5, 0.0])
        np.testing.assert_allclose(canonical.r[:, 1], [0.0, 1.0, 1.5])
        np.testing.assert_allclose(canonical.r[:, 2], [1.5, 0.0, 1.0])
        assert canonical.identity_covariance

    def test_arrays_are_read_only(self, canonical):
        with pytest.raises(ValueError):
            canonical.theta[0] = 1.0

    def test_rejects_indefinite_gamma(self):
        with pytest.raises(InvalidProblemData):
            ProblemData(theta=[-1, -1, -1], gamma=np.diag([1.0, -1.0, 1.0]), r=np.eye(3))

    def test_rejects_asymmetric_gamma(self):
        gamma = np.eye(3)
        gamma[0, 1] = 0.5
        with pytest.raises(InvalidProblemData):
            ProblemData(theta=[-1, -1, -1], gamma=gamma, r=np.eye(3))

    def test_rejects_bad_shape(self):
        with pytest.raises(InvalidProblemData):
            ProblemData(theta=[-1, -1], gamma=np.eye(3), r=np.eye(3))

    def test_rs_params_reject_bad_rho(self):
        with pytest.raises(ValueError):
            RsParams(theta0=-1.0, r1=0.0, r2=0.0, rho=-0.5)


class TestLoadProblem:
    def test_rs_form(self):
        data = load_problem({"theta0": -1.0, "r1": 1.5, "r2": 0.0})
        assert data.params == CANONICAL
        np.testing.assert_allclose(data.r, rs_reflection(1.5, 0.0))

    def test_general_form(self):
        data = load_problem({"theta": [-1, -2, -3], "Gamma": np.eye(3).tolist(), "R": np.eye(3).tolist()})
        assert data.params is None
        np.testing.assert_allclose(data.theta, [-1, -2, -3])

    def test_unknown_keys(self):
        with pytest.raises(InvalidProblemData):
            load_problem({"drift": 1})

    def test_malformed_matrix(self):
        with pytest.raises(InvalidProblemData):
            load_problem({"theta": [-1, -1, -1], "Gamma": [[1, 0], [0, 1]], "R": np.eye(3).tolist()})


class TestNorms:
    def test_identity_inner_product(self, canonical):
        assert inner([1, 2, 3], [3, 2, 1], canonical) == pytest.approx(10.0)
        assert norm([3, 4, 0], canonical) == pytest.approx(5.0)

    def test_row_norms_match_norm(self, correlated):
        vectors = np.array([[1.0, 0.0, 0.0], [1.0, -2.0, 0.5]])
        expected = [norm(v, correlated) for v in vectors]
        np.testing.assert_allclose(row_norms(vectors, correlated), expected, rtol=1e-12)


class TestRsInverses:
    @pytest.mark.parametrize("sigma2, rho", [(1.0, 0.0), (2.0, 0.3), (0.5, -0.4), (3.0, 0.85)])
    def test_gamma_inverse(self, sigma2, rho):
        inverse = rs_gamma_inverse(sigma2, rho).matrix()
        np.testing.assert_allclose(rs_covariance(sigma2, rho) @ inverse, np.eye(3), atol=1e-10)

    def test_gamma_inverse_order(self):
        inverse = rs_gamma_inverse(1.0, 0.3)
        assert inverse.gamma0 > inverse.gamma1

    def test_gamma_inverse_rejects_rho(self):
        with pytest.raises(InvalidProblemData):
            rs_gamma_inverse(1.0, 1.0)

    @pytest.mark.parametrize("r1, r2", [(1.5, 0.0), (0.0, 0.0), (0.4, 1.2), (-0.3, 0.6)])
    def test_r_inverse(self, r1, r2):
        inverse = rs_r_inverse(r1, r2).matrix()
        np.testing.assert_allclose(rs_reflection(r1, r2) @ inverse, np.eye(3), atol=1e-10)

    @pytest.mark.parametrize("r1, r2", [(1.0, 1.0), (-0.5, -0.5), (0.2, -1.2)])
    def test_singular_r(self, r1, r2):
        with pytest.raises(SingularMatrixError):
            rs_r_inverse(r1, r2)


class TestStructure:
    def test_rotational_symmetry(self, canonical, correlated):
        assert is_rotationally_symmetric(canonical)
        assert is_rotationally_symmetric(correlated)
        lopsided = ProblemData(theta=[-1, -2, -1], gamma=np.eye(3), r=np.eye(3))
        assert not is_rotationally_symmetric(lopsided)

    def test_skew_symmetry(self, identity, canonical):
        assert is_skew_symmetric(identity)
        assert not is_skew_symmetric(canonical)

    def test_rotate_and_mirror(self):
        np.testing.assert_allclose(rotate_vector([1, 2, 3], 1), [2, 3, 1])
        np.testing.assert_allclose(rotate_vector([1, 2, 3], 2), [3, 1, 2])
        np.testing.assert_allclose(mirror_vector([1, 2, 3]), [2, 1, 3])

    @hypothesis_settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    )
    def test_rotation_preserves_rs_inner_product(self, v, w):
        data = rs_problem(CORRELATED)
        for shift in (1, 2):
            assert inner(rotate_vector(v, shift), rotate_vector(w, shift), data) == pytest.approx(
                inner(v, w, data), rel=1e-9, abs=ATOL * 100
            )

    @hypothesis_settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        st.floats(0.25, 4.0),
        st.floats(-0.45, 0.9),
    )
    def test_gamma_norm_triangle_inequality(self, v, w, sigma2, rho):
        data = rs_problem(RsParams(theta0=-1.0, r1=0.4, r2=0.2, sigma2=sigma2, rho=rho))
        v, w = np.array(v), np.array(w)
        assert norm(v + w, data) <= norm(v, data) + norm(w, data) + 1e-9
        assert abs(inner(v, w, data)) <= norm(v, data) * norm(w, data) + 1e-9
