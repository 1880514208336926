"""Regulation triples: Skorohod validation, cost and transformations"""

import numpy as np
import pytest

from app.core.costs import FaceSet, optimal_segment, unit
from app.core.exceptions import InvalidProblemData, PathValidationError
from app.core.geometry import ProblemData
from app.core.paths import (
    RegulationTriple,
    Segment,
    empty_path,
    merge_paths,
    path_cost,
    path_from_json,
    path_to_json,
    require_valid,
    rotate_path,
    scale_path,
    segment_from_rates,
    validate_triple,
)
from tests.conftest import CANONICAL_AXIS_COST, CANONICAL_RATES

RTOL = 1e-9


def _single(data, z_start, duration, xdot, ydot=(0.0, 0.0, 0.0)) -> RegulationTriple:
    segment = segment_from_rates(np.asarray(z_start, dtype=float), duration, xdot, ydot, data)
    return RegulationTriple(origin=np.asarray(z_start, dtype=float), segments=[segment])


def _conditions(report):
    return {v.condition for v in report.violations}


class TestValidation:
    def test_free_segment_is_valid(self, identity):
        path = _single(identity, [0, 0, 0], 1.0, [1.0, 2.0, 0.5])
        assert validate_triple(path, identity).valid

    def test_leaving_the_octant(self, identity):
        path = _single(identity, [0, 0, 0], 1.0, [-1.0, 0.0, 0.0])
        assert _conditions(validate_triple(path, identity)) == {"nonnegativity"}

    def test_pushing_off_the_face(self, identity):
        path = _single(identity, [1, 1, 1], 1.0, [-1.0, 0.0, 0.0], [1.0, 0.0, 0.0])
        assert "complementarity" in _conditions(validate_triple(path, identity))

    def test_negative_push(self, identity):
        path = _single(identity, [0, 1, 1], 1.0, [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0])
        assert "monotone_push" in _conditions(validate_triple(path, identity))

    def test_state_equation(self, identity):
        segment = Segment(
            duration=1.0,
            xdot=np.array([1.0, 0.0, 0.0]),
            ydot=np.zeros(3),
            zdot=np.array([2.0, 0.0, 0.0]),
            z_start=np.zeros(3)
        )
        path = RegulationTriple(origin=np.zeros(3), segments=[segment])
        assert "state_equation" in _conditions(validate_triple(path, identity))

    def test_gap_between_segments(self, identity):
        first = segment_from_rates(np.zeros(3), 1.0, [1.0, 0.0, 0.0], np.zeros(3), identity)
        second = segment_from_rates(np.array([2.0, 0.0, 0.0]), 1.0, [1.0, 0.0, 0.0], np.zeros(3), identity)
        path = RegulationTriple(origin=np.zeros(3), segments=[first, second])
        report = validate_triple(path, identity)
        assert report.first.condition == "continuity"
        assert report.first.segment == 1

    def test_require_valid_raises_with_report(self, identity):
        path = _single(identity, [0, 0, 0], 1.0, [-1.0, 0.0, 0.0])
        with pytest.raises(PathValidationError) as info:
            require_valid(path, identity)
        assert not info.value.report.valid

    def test_zero_duration_rejected(self):
        with pytest.raises(PathValidationError):
            Segment(duration=0.0, xdot=np.zeros(3), ydot=np.zeros(3), zdot=np.zeros(3), z_start=np.zeros(3))


class TestCost:
    def test_empty_path_is_free(self, canonical):
        assert path_cost(empty_path([0, 0, 0]), canonical) == 0.0

    def test_following_the_drift_is_free(self, identity):
        path = _single(identity, [1, 1, 1], 0.5, identity.theta)
        assert path_cost(path, identity) == pytest.approx(0.0)

    def test_quadratic_cost(self, identity):
        # 1/2 ||(1,0,0) - (-1,-1,-1)||^2 * 2
        path = _single(identity, [0, 0, 0], 2.0, [1.0, 0.0, 0.0])
        assert path_cost(path, identity) == pytest.approx(6.0)

    def test_optimal_axis_segment(self, canonical):
        path = optimal_segment(FaceSet.of(1, 2), np.zeros(3), unit(3), canonical)
        assert validate_triple(path, canonical).valid
        np.testing.assert_allclose(path.endpoint, unit(3), atol=1e-12)
        np.testing.assert_allclose(path.segments[0].ydot[:2], CANONICAL_RATES, rtol=1e-9)
        assert path_cost(path, canonical) == pytest.approx(CANONICAL_AXIS_COST, rel=RTOL)


class TestTransformations:
    def test_scaling_is_linear_in_cost(self, canonical):
        path = optimal_segment(FaceSet.of(1, 2), np.zeros(3), unit(3), canonical)
        scaled = scale_path(path, 0.25)
        np.testing.assert_allclose(scaled.endpoint, 0.25 * unit(3), atol=1e-12)
        assert path_cost(scaled, canonical) == pytest.approx(0.25 * path_cost(path, canonical), rel=RTOL)

    def test_rotation_preserves_cost(self, canonical):
        path = optimal_segment(FaceSet.of(1, 2), np.zeros(3), unit(3), canonical)
        for shift in (1, 2):
            rotated = rotate_path(path, shift, canonical)
            assert validate_triple(rotated, canonical).valid
            assert path_cost(rotated, canonical) == pytest.approx(path_cost(path, canonical), rel=RTOL)
        np.testing.assert_allclose(rotate_path(path, 1, canonical).endpoint, unit(2), atol=1e-12)

    def test_bad_shift(self, canonical):
        with pytest.raises(InvalidProblemData):
            rotate_path(empty_path([0, 0, 0]), 3, canonical)

    def test_rotation_needs_symmetric_data(self, canonical):
        path = optimal_segment(FaceSet.of(1, 2), np.zeros(3), unit(3), canonical)
        lopsided = ProblemData(theta=[-1.0, -2.0, -1.0], gamma=np.eye(3), r=np.eye(3))
        with pytest.raises(InvalidProblemData, match="rotationally symmetric"):
            rotate_path(path, 1, lopsided)

    def test_merge(self, canonical):
        first = optimal_segment(FaceSet.of(1, 2), np.zeros(3), unit(3), canonical)
        second = optimal_segment(FaceSet(), unit(3), np.array([1.0, 1.0, 1.0]), canonical)
        merged = merge_paths(first, second)
        assert len(merged) == 2
        assert path_cost(merged, canonical) == pytest.approx(
            path_cost(first, canonical) + path_cost(second, canonical), rel=RTOL
        )

    def test_merge_rejects_gap(self, canonical):
        first = optimal_segment(FaceSet.of(1, 2), np.zeros(3), unit(3), canonical)
        with pytest.raises(InvalidProblemData):
            merge_paths(first, empty_path([1, 0, 0]))


class TestJson:
    def test_rebuilds_positions_from_rates(self, canonical):
        path = optimal_segment(FaceSet.of(1, 2), np.zeros(3), unit(3), canonical)
        payload = path_to_json(path)
        assert set(payload["segments"][0]) == {"T", "xdot", "ydot"}
        rebuilt = path_from_json(payload, canonical)
        np.testing.assert_allclose(rebuilt.endpoint, path.endpoint, atol=1e-12)
        assert path_cost(rebuilt, canonical) == pytest.approx(path_cost(path, canonical), rel=RTOL)

    def test_malformed_payload(self, canonical):
        with pytest.raises(InvalidProblemData):
            path_from_json({"origin": [0, 0, 0], "segments": [{"T": 1.0}]}, canonical)
