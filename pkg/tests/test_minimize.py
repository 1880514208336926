"""Derivative-free minimizers"""

import numpy as np
import pytest

from app.core.exceptions import OptimizationError
from app.core.minimize import golden_section, grid_zoom, scan_then_golden

XTOL = 1e-6


class TestGoldenSection:
    def test_quadratic(self):
        result = golden_section(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 1e-10)
        assert result.x[0] == pytest.approx(0.3, abs=XTOL)
        assert result.value == pytest.approx(0.0, abs=1e-12)

    def test_reversed_bracket(self):
        result = golden_section(lambda x: abs(x - 2.0), 5.0, 0.0, 1e-10)
        assert result.x[0] == pytest.approx(2.0, abs=XTOL)

    def test_tiny_bracket(self):
        result = golden_section(lambda x: x, 1.0, 1.0 + 1e-12, 1e-10)
        assert result.evaluations == 1


class TestScanThenGolden:
    def test_interior_minimum(self):
        result = scan_then_golden(lambda x: (x - 0.7) ** 2 + 1.0, 0.0, 1.0)
        assert result.x[0] == pytest.approx(0.7, abs=XTOL)
        assert result.value == pytest.approx(1.0, abs=1e-12)
        assert not result.at_lower_edge

    def test_lower_edge_flag(self):
        result = scan_then_golden(lambda x: x, 0.0, 1.0)
        assert result.at_lower_edge
        assert result.x[0] == pytest.approx(0.0, abs=XTOL)

    def test_non_finite_samples_are_skipped(self):
        f = lambda x: np.where(x < 0.5, np.nan, (x - 0.8) ** 2)
        result = scan_then_golden(f, 0.0, 1.0)
        assert result.x[0] == pytest.approx(0.8, abs=XTOL)

    def test_nowhere_finite(self):
        with pytest.raises(OptimizationError):
            scan_then_golden(lambda x: np.full_like(x, np.nan), 0.0, 1.0)

    def test_explicit_grid(self):
        grid = np.linspace(0.1, 0.9, 9)
        result = scan_then_golden(lambda x: (x - 0.45) ** 2, 0.1, 0.9, grid=grid)
        assert result.x[0] == pytest.approx(0.45, abs=XTOL)


class TestGridZoom:
    def test_two_dimensional_quadratic(self):
        target = np.array([0.2, 0.6])
        result = grid_zoom(lambda p: np.sum((p - target) ** 2, axis=1), [0.0, 0.0], [1.0, 1.0])
        np.testing.assert_allclose(result.x, target, atol=XTOL)

    def test_minimum_on_the_boundary(self):
        result = grid_zoom(lambda p: p[:, 0] + (p[:, 1] - 0.5) ** 2, [0.0, 0.0], [1.0, 1.0])
        np.testing.assert_allclose(result.x, [0.0, 0.5], atol=XTOL)
        assert result.value == pytest.approx(0.0, abs=1e-10)

    def test_three_dimensions(self):
        target = np.array([1.0, 0.25, 2.5])
        result = grid_zoom(lambda p: np.sum(np.abs(p - target), axis=1), [0.0] * 3, [3.0] * 3, initial_points=12)
        assert result.value == pytest.approx(0.0, abs=1e-6)
