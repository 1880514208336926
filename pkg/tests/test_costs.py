"""Closed-form path costs and their compositions"""

import math

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st

from app.core.costs import (
    FaceSet,
    attained_cost,
    axis_unit_cost,
    cost_report,
    direct_cost,
    direct_costs,
    evaluate_reflected,
    faces_of_point,
    projection,
    reflected_cost,
    reflectivity_check,
    three_piece_gradual,
    two_piece_via_axis,
    two_piece_via_face,
    unit,
)
from app.core.exceptions import InvalidProblemData, UnsupportedCovarianceError
from app.core.geometry import ProblemData, rotate_vector, rs_problem
from app.core.solver import probe_cost
from app.schemas.reports import Orientation, Provenance
from tests.conftest import CANONICAL, CANONICAL_AXIS_COST, CANONICAL_RATES

RTOL = 1e-9
QUOTED_TOL = 1e-3

coordinate = st.floats(0.0, 5.0)


@pytest.fixture
def lopsided():
    # first reflection column points out of face 2 hard enough to break reflectivity
    r = np.eye(3)
    r[1, 0] = -3.0
    return ProblemData(theta=[-1.0, -1.0, -1.0], gamma=np.eye(3), r=r)


class TestFaceSet:
    def test_parse(self):
        assert FaceSet.parse("1,2") == FaceSet.of(2, 1)
        assert FaceSet.parse("{3}") == FaceSet.of(3)
        assert FaceSet.parse("") == FaceSet()
        assert FaceSet.parse([2, 3]).axis == 1

    @pytest.mark.parametrize("text", ["4", "a,b", "0,1"])
    def test_parse_rejects(self, text):
        with pytest.raises(InvalidProblemData):
            FaceSet.parse(text)

    def test_axis_needs_two_faces(self):
        with pytest.raises(InvalidProblemData):
            FaceSet.of(1).axis

    def test_faces_of_point(self):
        assert faces_of_point([0.0, 0.0, 2.0]) == FaceSet.of(1, 2)
        assert faces_of_point([1.0, 0.0, 2.0]) == FaceSet.of(2)
        assert faces_of_point([1.0, 1.0, 1.0]) == FaceSet()

    def test_rotate_follows_rotate_vector(self):
        assert FaceSet.of(1, 2).rotate(1) == FaceSet.of(1, 3)
        assert FaceSet.of(1, 2).rotate(1).contains_point(rotate_vector(unit(3), 1))


class TestDirectCost:
    def test_unit_axis(self, canonical):
        assert direct_cost(np.zeros(3), unit(3), canonical) == pytest.approx(math.sqrt(3.0) + 1.0)

    def test_zero_displacement(self, canonical):
        v = np.array([0.3, 1.2, 0.0])
        assert direct_cost(v, v, canonical) == 0.0

    def test_against_the_drift(self, canonical):
        assert direct_cost(np.zeros(3), np.ones(3), canonical) == pytest.approx(6.0)

    def test_batch_matches_scalar(self, correlated, rng):
        d = rng.uniform(0.0, 2.0, size=(20, 3))
        expected = [direct_cost(np.zeros(3), row, correlated) for row in d]
        np.testing.assert_allclose(direct_costs(correlated, d), expected, rtol=1e-12, atol=1e-14)

    @hypothesis_settings(max_examples=100, deadline=None)
    @given(coordinate, coordinate, coordinate, st.floats(0.01, 10.0))
    def test_homogeneous(self, x, y, z, c):
        data = rs_problem(CANONICAL)
        v = np.array([x, y, z])
        assert direct_cost(np.zeros(3), c * v, data) == pytest.approx(c * direct_cost(np.zeros(3), v, data), rel=1e-9, abs=1e-12)


class TestProjection:
    def test_identities(self, canonical):
        pair = projection(canonical, FaceSet.of(1, 2))
        columns = canonical.r[:, [0, 1]]
        np.testing.assert_allclose(pair.a_matrix @ pair.a_matrix, pair.a_matrix, atol=1e-12)
        np.testing.assert_allclose(pair.a_matrix @ columns, 0.0, atol=1e-12)
        np.testing.assert_allclose(pair.b_matrix @ columns, np.eye(2), atol=1e-12)

    def test_empty_face_set(self, canonical):
        pair = projection(canonical, FaceSet())
        np.testing.assert_allclose(pair.a_matrix, np.eye(3))

    def test_requires_identity_covariance(self, correlated):
        with pytest.raises(UnsupportedCovarianceError):
            projection(correlated, FaceSet.of(1))


class TestReflectedCost:
    def test_axis_cost(self, canonical):
        value = evaluate_reflected(FaceSet.of(1, 2), np.zeros(3), unit(3), canonical)
        assert value.value == pytest.approx(CANONICAL_AXIS_COST, rel=RTOL)
        assert value.value == pytest.approx(0.4211, abs=QUOTED_TOL)
        assert value.attained
        assert value.provenance == Provenance.CLOSED_FORM
        np.testing.assert_allclose(value.reflectivity, CANONICAL_RATES, rtol=1e-9)

    def test_reflectivity_vector(self, canonical):
        vector, holds = reflectivity_check(FaceSet.of(1, 2), unit(3), canonical)
        assert holds
        np.testing.assert_allclose(vector, [0.0526, 1.5526], atol=QUOTED_TOL)

    def test_axis_costs_agree(self, canonical):
        costs = [axis_unit_cost(canonical, axis) for axis in (1, 2, 3)]
        np.testing.assert_allclose(costs, CANONICAL_AXIS_COST, rtol=RTOL)

    def test_identity_reflection_axis_cost(self, identity):
        assert axis_unit_cost(identity, 3) == pytest.approx(2.0)

    def test_failed_reflectivity_is_a_lower_bound(self, lopsided):
        v = unit(2)
        formula = evaluate_reflected(FaceSet.of(1), np.zeros(3), v, lopsided)
        attained = attained_cost(FaceSet.of(1), np.zeros(3), v, lopsided)
        assert not formula.attained
        assert formula.value < attained.value
        assert attained.value == pytest.approx(direct_cost(np.zeros(3), v, lopsided))
        assert attained.support == FaceSet()

    def test_point_off_the_face(self, canonical):
        with pytest.raises(InvalidProblemData):
            reflected_cost(FaceSet.of(1), np.zeros(3), np.array([1.0, 0.0, 0.0]), canonical)

    def test_origin_face_set_rejected(self, canonical):
        with pytest.raises(InvalidProblemData):
            reflected_cost(FaceSet.of(1, 2, 3), np.zeros(3), np.zeros(3), canonical)

    def test_rotation_invariance(self, canonical):
        v = np.array([0.0, 0.7, 1.3])
        base = reflected_cost(FaceSet.of(1), np.zeros(3), v, canonical)
        for shift in (1, 2):
            rotated = reflected_cost(FaceSet.of(1).rotate(shift), np.zeros(3), rotate_vector(v, shift), canonical)
            assert rotated == pytest.approx(base, rel=RTOL)

    def test_general_covariance_is_numeric(self, correlated):
        value = evaluate_reflected(FaceSet.of(1), np.zeros(3), np.array([0.0, 1.0, 2.0]), correlated)
        assert value.provenance == Provenance.NUMERIC
        assert value.value > 0.0

    def test_reflectivity_check_needs_identity(self, correlated):
        with pytest.raises(UnsupportedCovarianceError):
            reflectivity_check(FaceSet.of(1, 2), unit(3), correlated)


class TestCompositions:
    def test_axis_then_face_beats_axis(self, canonical):
        search = two_piece_via_axis(FaceSet.of(2, 3), 2, unit(3), canonical)
        probe = probe_cost(canonical, Orientation.VIA_F2, 0.5)
        assert probe == pytest.approx(0.3317, abs=QUOTED_TOL)
        assert search.value <= probe + 1e-9
        assert search.value < CANONICAL_AXIS_COST
        assert search.argmin[1] == 0.0 and search.argmin[2] == 0.0

    def test_axis_composition_needs_point_on_face(self, canonical):
        with pytest.raises(InvalidProblemData):
            two_piece_via_axis(FaceSet.of(2, 3), 2, np.array([1.0, 1.0, 1.0]), canonical)

    def test_via_face_never_worse_than_direct(self, canonical):
        v = np.array([0.4, 1.0, 0.8])
        for faces in (FaceSet.of(1), FaceSet.of(1, 2)):
            search = two_piece_via_face(faces, v, canonical)
            assert search.value <= direct_cost(np.zeros(3), v, canonical) + 1e-9
            assert faces.contains_point(search.argmin)

    def test_three_piece_never_worse_than_direct(self, canonical):
        v = np.array([0.5, 0.5, 1.0])
        search = three_piece_gradual(FaceSet.of(1, 2), 1, v, canonical)
        assert search.value <= direct_cost(np.zeros(3), v, canonical) + 1e-9
        assert search.axis_point is not None
        assert FaceSet.of(1).contains_point(search.argmin)

    def test_three_piece_needs_interior_point(self, canonical):
        with pytest.raises(InvalidProblemData):
            three_piece_gradual(FaceSet.of(1, 2), 1, np.array([0.0, 1.0, 1.0]), canonical)


class TestCostReport:
    def test_axis_point(self, canonical):
        report = cost_report(canonical, unit(3))
        families = {entry.family for entry in report.entries}
        assert {"direct", "reflected", "one_piece"} <= families
        axis = next(e for e in report.entries if e.family == "reflected" and e.faces == [1, 2])
        assert axis.value == pytest.approx(CANONICAL_AXIS_COST, rel=RTOL)

    def test_face_point_lists_axis_compositions(self, canonical):
        report = cost_report(canonical, np.array([0.0, 0.6, 1.0]))
        vias = [e for e in report.entries if e.family == "two_piece_axis"]
        assert {tuple(e.faces) for e in vias} == {(1, 2), (1, 3)}
        assert all(e.via == 1 for e in vias)

    def test_start_point_restricts_faces_to_shared_ones(self, canonical):
        report = cost_report(canonical, unit(3), w=np.array([0.0, 0.5, 0.2]))
        reflected = {tuple(e.faces) for e in report.entries if e.family == "reflected"}
        assert reflected == {(1,)}
        assert report.start == [0.0, 0.5, 0.2]
        assert not any(e.family.startswith("two_piece") for e in report.entries)

    def test_report_round_trips(self, canonical):
        report = cost_report(canonical, unit(3))
        assert type(report).model_validate(report.model_dump()) == report
