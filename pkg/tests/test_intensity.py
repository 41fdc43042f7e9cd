"""
Unit tests for intensity surfaces and rho-bar.
"""

import logging
import math

import numpy as np
import pytest

from netfrak.errors import BadBandwidth, EmptyGrid, EmptySurface, TooFewPoints
from netfrak.geometry import PointPattern, build_network, grid_points
from netfrak.intensity import (
    ConstantIntensity,
    FunctionIntensity,
    KernelIntensity,
    constant_intensity,
    gaussian_kernel,
    kernel_intensity,
    rho_bar,
    scott_bandwidth,
)


@pytest.fixture
def star_pattern(star):
    return PointPattern(star, [0, 0, 1, 2, 2], [0.2, 0.7, 0.5, 0.1, 0.9])


class TestBandwidth:
    """Scott's rule and the kernel itself."""

    def test_scott(self, star_pattern):
        xy = star_pattern.xy
        var = xy.var(axis=0, ddof=1)
        expected = 5 ** (-1 / 6) * math.sqrt(var.mean())
        assert scott_bandwidth(star_pattern) == pytest.approx(expected)

    def test_scott_needs_two_points(self, star):
        with pytest.raises(TooFewPoints):
            scott_bandwidth(PointPattern(star, [0], [0.5]))

    def test_gaussian_kernel_peak(self):
        assert gaussian_kernel(0.0, 2.0) == pytest.approx(1 / (8 * math.pi))


class TestKernelIntensity:
    """Per-point normalised kernel estimate."""

    def test_mass_preserved(self, star, star_pattern):
        """Test that the surface integrates to the number of points."""
        surface = KernelIntensity(star, star_pattern, sigma=0.2, quad_spacing=0.02)
        assert surface.total_mass() == pytest.approx(5.0, rel=1e-3)

    def test_mass_preserved_on_loop(self, square):
        pattern = PointPattern(square, [0, 1, 3], [0.1, 0.5, 0.95])
        surface = KernelIntensity(square, pattern, sigma=0.3, quad_spacing=0.03)
        assert surface.total_mass() == pytest.approx(3.0, rel=1e-3)

    def test_upper_bound_dominates(self, star, star_pattern):
        surface = KernelIntensity(star, star_pattern, sigma=0.15)
        scan = grid_points(star, 1e-3)
        assert surface.evaluate(scan).max() <= surface.upper_bound()

    def test_positive_at_data_points(self, star, star_pattern):
        surface = KernelIntensity(star, star_pattern, sigma=0.1)
        assert np.all(surface.evaluate(star_pattern) > 0)

    def test_bad_bandwidth(self, star, star_pattern):
        with pytest.raises(BadBandwidth):
            KernelIntensity(star, star_pattern, sigma=0.0)
        with pytest.raises(BadBandwidth):
            KernelIntensity(star, star_pattern, sigma=float("nan"))

    def test_workers_do_not_change_values(self, star, star_pattern):
        one = KernelIntensity(star, star_pattern, sigma=0.2, workers=1)
        many = KernelIntensity(star, star_pattern, sigma=0.2, workers=4)
        np.testing.assert_array_equal(one.normalisers, many.normalisers)

    def test_describe(self, star, star_pattern):
        info = KernelIntensity(star, star_pattern, sigma=0.2).describe()
        assert info["surface"] == "kernel"
        assert info["sigma"] == 0.2
        assert info["n_points"] == 5

    def test_shifted_network_same_values(self, star, star_pattern):
        """Test that moving network and pattern together leaves the surface unchanged."""
        moved = build_network(star.vertices + np.array([8.0, -4.0]), star.segments)
        pattern = PointPattern(moved, star_pattern.segments, star_pattern.offsets)
        before = KernelIntensity(star, star_pattern, sigma=0.2, quad_spacing=0.02)
        after = KernelIntensity(moved, pattern, sigma=0.2, quad_spacing=0.02)
        grid = grid_points(star, 0.01)
        moved_grid = PointPattern(moved, grid.segments, grid.offsets)
        np.testing.assert_allclose(
            after.evaluate(moved_grid), before.evaluate(grid), rtol=1e-12, atol=1e-12
        )
        np.testing.assert_allclose(after.normalisers, before.normalisers, rtol=1e-12)

    def test_factory_matches_class(self, star, star_pattern):
        built = kernel_intensity(star, star_pattern, 0.25, quad_spacing=0.025)
        direct = KernelIntensity(star, star_pattern, sigma=0.25, quad_spacing=0.025)
        grid = grid_points(star, 0.1)
        np.testing.assert_array_equal(built.evaluate(grid), direct.evaluate(grid))
        assert built.describe() == direct.describe()


class TestOtherSurfaces:
    """Constant and known-function surfaces."""

    def test_constant_from_pattern(self, star, star_pattern):
        surface = constant_intensity(star_pattern)
        assert surface.value == pytest.approx(5 / 3)
        np.testing.assert_allclose(surface.evaluate(star_pattern), 5 / 3)
        assert surface.total_mass() == pytest.approx(5.0)

    def test_function_clips_negative(self, star):
        surface = FunctionIntensity(star, lambda x, y: x)
        pattern = PointPattern(star, [0, 2], [0.5, 0.5])
        np.testing.assert_allclose(surface.evaluate(pattern), [0.5, 0.0])

    def test_function_bound(self, star):
        surface = FunctionIntensity(star, lambda x, y: 1.0 + y, bound=2.0)
        assert surface.upper_bound() == 2.0
        estimated = FunctionIntensity(star, lambda x, y: 1.0 + y).upper_bound()
        assert estimated >= 2.0


class TestRhoBar:
    """Lower bound used in the inhomogeneous products."""

    def test_grid_minimum(self, star):
        surface = FunctionIntensity(star, lambda x, y: 2.0 + x)
        rb = rho_bar(surface, grid_points(star, 0.1))
        assert rb.value == pytest.approx(2.0 - 0.95)
        assert not rb.floor_applied

    def test_floor_engages(self, star, caplog):
        surface = FunctionIntensity(star, lambda x, y: x)
        with caplog.at_level(logging.WARNING, logger="netfrak.intensity"):
            rb = rho_bar(surface, grid_points(star, 0.1), floor_eps=1e-3)
        assert rb.floor_applied
        assert rb.grid_min == 0.0
        assert rb.value == pytest.approx(1e-3 * 0.5 / 3.0, rel=1e-3)
        assert "floor engaged" in caplog.text
        assert rb.as_metadata()["rho_bar_floor_applied"] is True

    def test_empty_grid(self, star):
        with pytest.raises(EmptyGrid):
            rho_bar(ConstantIntensity(star, 1.0), PointPattern.empty(star))

    def test_empty_surface(self, star):
        with pytest.raises(EmptySurface):
            rho_bar(ConstantIntensity(star, 0.0), grid_points(star, 0.1))
