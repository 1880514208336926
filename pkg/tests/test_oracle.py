"""Numeric segment oracle, gradual enumeration and the seeded lemma suite"""

import itertools

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.costs import FaceSet, direct_cost, unit
from app.core.exceptions import InvalidProblemData, UnstableDataError
from app.core.geometry import rs_problem
from app.core.oracle import (
    CHECKS,
    condition1_survey,
    enumerate_gradual,
    face2_slope_at_axis,
    lemma_suite,
    oracle_equivalence,
    segment_cost_oracle,
)
from app.core.solver import best_cost_to_point
from app.schemas.problem import RsParams
from app.schemas.reports import OracleConfig
from tests.conftest import CANONICAL, CANONICAL_AXIS_COST, IDENTITY_R

ORACLE_RTOL = 1e-6

SMALL = OracleConfig(seed=7, samples=100, equivalence_samples=10, grid_resolution=8)


@pytest.fixture(scope="module")
def suite_report():
    return lemma_suite(SMALL)


class TestSegmentOracle:
    def test_direct_cost_general_covariance(self, correlated):
        v = np.array([0.4, 1.1, 0.7])
        expected = direct_cost(np.zeros(3), v, correlated)
        assert segment_cost_oracle(np.zeros(3), v, FaceSet(), correlated) == pytest.approx(expected, rel=ORACLE_RTOL)

    def test_forbidding_push_gives_direct_cost(self, canonical):
        value = segment_cost_oracle(np.zeros(3), unit(3), FaceSet.of(1, 2), canonical, forbid_push=True)
        assert value == pytest.approx(direct_cost(np.zeros(3), unit(3), canonical), rel=ORACLE_RTOL)

    def test_axis_cost(self, canonical):
        value = segment_cost_oracle(np.zeros(3), unit(3), FaceSet.of(1, 2), canonical)
        assert value == pytest.approx(CANONICAL_AXIS_COST, rel=ORACLE_RTOL)

    def test_zero_displacement(self, canonical):
        assert segment_cost_oracle(unit(3), unit(3), FaceSet.of(1), canonical) == 0.0

    def test_point_off_face(self, canonical):
        with pytest.raises(InvalidProblemData):
            segment_cost_oracle(np.zeros(3), np.ones(3), FaceSet.of(1), canonical)


class TestEnumerateGradual:
    def test_axis_point(self, canonical):
        assert enumerate_gradual(unit(3), canonical, SMALL) == pytest.approx(CANONICAL_AXIS_COST, rel=1e-9)

    def test_origin(self, canonical):
        assert enumerate_gradual(np.zeros(3), canonical, SMALL) == 0.0

    def test_unstable_data(self):
        data = rs_problem(RsParams(theta0=1.0, r1=0.0, r2=0.0))
        with pytest.raises(UnstableDataError):
            enumerate_gradual(unit(3), data, SMALL)

    @pytest.mark.parametrize("params", [CANONICAL, IDENTITY_R])
    def test_never_beats_solver_on_grid(self, params):
        data = rs_problem(params)
        axis = np.linspace(0.2, 2.0, 5)
        beaten = []
        for point in itertools.product(axis, axis, axis):
            v = np.array(point)
            brute = enumerate_gradual(v, data, SMALL)
            best = best_cost_to_point(params, v).cost
            if brute < best - 1e-6:
                beaten.append((point, brute, best))
        assert beaten == []

    @pytest.mark.parametrize("point", [[0.6, 0.0, 1.0], [0.0, 0.5, 1.2]])
    def test_never_beats_solver_on_faces(self, point):
        v = np.array(point)
        brute = enumerate_gradual(v, rs_problem(CANONICAL), SMALL)
        assert brute >= best_cost_to_point(CANONICAL, v).cost - 1e-6


class TestLemmaSuite:
    def test_no_violations(self, suite_report):
        assert suite_report.violation_count == 0, suite_report.violations[:3]

    def test_every_check_ran(self, suite_report):
        assert [check.name for check in suite_report.checks] == [name for name, _ in CHECKS]
        for check in suite_report.checks:
            assert check.passed + check.failed + check.skipped > 0, check.name

    def test_deterministic_per_check(self, suite_report):
        again = oracle_equivalence(SMALL)
        first = next(c for c in suite_report.checks if c.name == "oracle_equivalence")
        assert again.checks[0] == first

    def test_adversarial_failures_are_expected(self):
        cfg = SMALL.model_copy(update={"samples": 50, "equivalence_samples": 5, "adversarial": True})
        report = lemma_suite(cfg)
        extra = [check for check in report.checks if check.expected_violations]
        assert [check.name for check in extra] == ["different_r_reversed"]
        assert extra[0].failed > 0
        assert any(record.check == "different_r_reversed" for record in report.violations)
        assert report.violation_count == 0

    def test_equivalence_compares_requested_instances(self):
        cfg = SMALL.model_copy(update={"equivalence_samples": 250})
        check = oracle_equivalence(cfg).checks[0]
        assert check.passed + check.failed == 250
        assert check.failed == 0

    def test_face_growth_covers_shrunk_axis_points(self, suite_report):
        check = next(c for c in suite_report.checks if c.name == "face_growth")
        # per sample: growth, shrunk-axis comparison, convexity; plus two slope records per chunk
        assert check.passed == 3 * SMALL.samples + 2
        assert check.failed == 0

    def test_config_rejects_zero_samples(self):
        with pytest.raises(ValidationError):
            OracleConfig(samples=0)


class TestCondition1Survey:
    def test_counts_are_consistent(self):
        report = condition1_survey(0.1)
        assert report.stable_cells > 0
        assert report.condition1_cells + len(report.failures) == report.stable_cells
        assert all(r1 > r2 >= 0 for r1, r2 in report.failures)

    def test_bad_step(self):
        with pytest.raises(InvalidProblemData):
            condition1_survey(0.0)

    def test_face_slope_on_canonical_data(self, canonical):
        assert face2_slope_at_axis(canonical) == pytest.approx(1.0)
