"""Condition 1, spiral optimization, classification and best paths"""

import dataclasses

import numpy as np
import pytest

from app.core.costs import unit
from app.core import solver
from app.core.exceptions import (
    InvalidProblemData,
    SpiralDegenerateError,
    UnstableDataError,
    UnsupportedCovarianceError,
)
from app.core.geometry import rs_problem
from app.core.paths import path_cost, validate_triple
from app.core.solver import (
    best_cost_to_point,
    best_gradual_cost,
    build_spiral_path,
    classify_optimal_path,
    condition1,
    condition1_margin,
    dichotomy_holds,
    evaluate_spiral,
    optimize_spiral,
    spiral_objective,
)
from app.schemas.problem import RsParams
from app.schemas.reports import ClassificationReport, Orientation, Verdict
from tests.conftest import CANONICAL, CANONICAL_AXIS_COST, CANONICAL_K_STAR

RTOL = 1e-9
QUOTED_TOL = 1e-3


class TestCondition1:
    def test_canonical_holds(self):
        assert condition1(1.5, 0.0)
        assert condition1_margin(1.5, 0.0) == pytest.approx(10.5625)

    @pytest.mark.parametrize("r1, r2", [(0.5, 0.5), (0.2, 0.8), (1.5, -0.1), (2.5, 0.1)])
    def test_outside_region(self, r1, r2):
        assert not condition1(r1, r2)

    def test_dichotomy(self):
        assert dichotomy_holds(0.0, 0.0)
        assert dichotomy_holds(0.3, 0.9)
        assert dichotomy_holds(1.5, 0.0)
        assert not dichotomy_holds(-0.2, 0.5)


class TestSpiral:
    def test_objective_at_quoted_root(self):
        value = spiral_objective(CANONICAL, Orientation.VIA_F2, np.array([0.5363]))[0]
        assert value == pytest.approx(0.2384, abs=QUOTED_TOL)

    def test_optimum(self):
        spiral = optimize_spiral(CANONICAL, Orientation.VIA_F2)
        assert spiral.k_star == pytest.approx(CANONICAL_K_STAR, abs=1e-6)
        grid = np.linspace(0.01, 0.99, 197)
        assert spiral.total_cost <= np.min(spiral_objective(CANONICAL, Orientation.VIA_F2, grid)) + 1e-12
        assert spiral.total_cost < CANONICAL_AXIS_COST
        assert spiral.per_turn_cost == pytest.approx(spiral.total_cost * (1.0 - spiral.k_star))

    def test_truncated_path(self):
        data = rs_problem(CANONICAL)
        spiral = optimize_spiral(CANONICAL, Orientation.VIA_F2, turns=40)
        path = spiral.truncated_path
        assert validate_triple(path, data).valid
        np.testing.assert_allclose(path.endpoint, unit(3), atol=1e-9)
        np.testing.assert_allclose(path.origin, np.zeros(3))
        assert path_cost(path, data) == pytest.approx(spiral.total_cost, abs=1e-6)

    def test_tail_bound_covers_truncation(self):
        short = optimize_spiral(CANONICAL, Orientation.VIA_F2, turns=20)
        long = optimize_spiral(CANONICAL, Orientation.VIA_F2, turns=40)
        assert abs(short.path_cost - long.path_cost) <= short.tail_bound

    def test_orientations_mirror(self):
        mirrored = RsParams(theta0=-1.0, r1=0.0, r2=1.5)
        a = optimize_spiral(CANONICAL, Orientation.VIA_F2)
        b = optimize_spiral(mirrored, Orientation.VIA_F1)
        assert b.total_cost == pytest.approx(a.total_cost, rel=1e-9)
        assert b.k_star == pytest.approx(a.k_star, abs=1e-6)

    def test_fixed_shrink_factor(self):
        spiral = evaluate_spiral(CANONICAL, Orientation.VIA_F2, 0.5363, turns=30)
        assert spiral.k_star == 0.5363
        assert spiral.truncation_turns == 30
        assert spiral.total_cost == pytest.approx(0.2384, abs=QUOTED_TOL)

    def test_build_rejects_bad_arguments(self):
        with pytest.raises(InvalidProblemData):
            build_spiral_path(CANONICAL, Orientation.VIA_F2, 1.0, 10)
        with pytest.raises(InvalidProblemData):
            build_spiral_path(CANONICAL, Orientation.VIA_F2, 0.5, 0)

    def test_built_path_is_valid(self):
        data = rs_problem(CANONICAL)
        path = build_spiral_path(CANONICAL, Orientation.VIA_F2, 0.6, 5)
        assert len(path) == 6
        assert validate_triple(path, data).valid


class TestClassification:
    def test_canonical_is_spiral(self):
        result = classify_optimal_path(CANONICAL)
        assert result.verdict == Verdict.SPIRAL_OPTIMAL
        assert result.axis_cost == pytest.approx(0.4211, abs=QUOTED_TOL)
        assert result.spiral is not None
        assert result.spiral.orientation == Orientation.VIA_F2
        assert result.witness.spiral_condition[Orientation.VIA_F2.value]
        assert result.witness.probe_costs[Orientation.VIA_F2.value] == pytest.approx(0.3317, abs=QUOTED_TOL)
        assert all(item.holds for item in result.reflectivity)

    def test_identity_reflection_is_gradual(self, identity_params):
        result = classify_optimal_path(identity_params)
        assert result.verdict == Verdict.GRADUAL_OPTIMAL
        assert result.axis_cost == pytest.approx(2.0)
        assert result.spiral is None

    def test_negative_entry_is_inconclusive(self):
        result = classify_optimal_path(RsParams(theta0=-1.0, r1=-0.2, r2=0.5))
        assert result.verdict == Verdict.INCONCLUSIVE
        assert not result.dichotomy_holds

    def test_degenerate_spiral_after_cheaper_alternative_is_inconclusive(self, monkeypatch):
        def degenerate(data, orientation, turns=None):
            raise SpiralDegenerateError("spiral objective has no interior minimizer")

        monkeypatch.setattr(solver, "_optimize_spiral", degenerate)
        result = classify_optimal_path(CANONICAL)
        assert result.witness.spiral_condition[Orientation.VIA_F2.value]
        assert result.verdict == Verdict.INCONCLUSIVE
        assert result.spiral is None
        assert "no valid spiral" in result.witness.reason

    def test_spiral_not_beating_axis_is_inconclusive(self, monkeypatch):
        real = solver._optimize_spiral

        def expensive(data, orientation, turns=None):
            return dataclasses.replace(real(data, orientation, turns), total_cost=10.0)

        monkeypatch.setattr(solver, "_optimize_spiral", expensive)
        result = classify_optimal_path(CANONICAL)
        assert result.verdict == Verdict.INCONCLUSIVE
        assert result.witness.spiral_costs[Orientation.VIA_F2.value] == 10.0
        assert "does not beat the axis" in result.witness.reason

    def test_gradual_verdict_has_no_reason(self, identity_params):
        result = classify_optimal_path(identity_params)
        assert not any(result.witness.spiral_condition.values())
        assert result.witness.reason is None

    def test_unstable(self):
        with pytest.raises(UnstableDataError):
            classify_optimal_path(RsParams(theta0=1.0, r1=0.0, r2=0.0))

    def test_needs_identity_covariance(self):
        with pytest.raises(UnsupportedCovarianceError):
            classify_optimal_path(RsParams(theta0=-1.0, r1=0.0, r2=0.0, sigma2=2.0))

    def test_report_round_trips(self):
        report = classify_optimal_path(CANONICAL).to_report()
        assert ClassificationReport.model_validate_json(report.model_dump_json()) == report


class TestBestPath:
    def test_axis_point_uses_spiral(self):
        spiral = optimize_spiral(CANONICAL, Orientation.VIA_F2)
        best = best_cost_to_point(CANONICAL, 2.0 * unit(3))
        assert best.family == "spiral"
        assert best.cost == pytest.approx(2.0 * spiral.total_cost, rel=1e-9)
        assert not best.inconclusive

    def test_gradual_axis_point(self):
        best = best_gradual_cost(CANONICAL, unit(3))
        assert best.family == "axis"
        assert best.cost == pytest.approx(CANONICAL_AXIS_COST, rel=RTOL)

    def test_origin(self):
        best = best_cost_to_point(CANONICAL, np.zeros(3))
        assert best.cost == 0.0
        assert best.family == "origin"

    def test_interior_point_path_matches_cost(self):
        data = rs_problem(CANONICAL)
        v = np.array([0.6, 0.4, 1.0])
        best = best_cost_to_point(CANONICAL, v)
        assert validate_triple(best.path, data).valid
        np.testing.assert_allclose(best.path.endpoint, v, atol=1e-6)
        assert path_cost(best.path, data) == pytest.approx(best.cost, abs=1e-6)

    def test_face_point_never_worse_than_gradual(self):
        v = np.array([0.0, 0.5, 1.0])
        assert best_cost_to_point(CANONICAL, v).cost <= best_gradual_cost(CANONICAL, v).cost + 1e-9

    def test_outside_octant(self):
        with pytest.raises(InvalidProblemData):
            best_cost_to_point(CANONICAL, np.array([-1.0, 0.0, 1.0]))

    def test_report(self):
        report = best_cost_to_point(CANONICAL, unit(3)).to_report(unit(3))
        assert report.point == [0.0, 0.0, 1.0]
        assert set(report.path) == {"origin", "segments"}
