"""
Unit tests for networks, locations, patterns and grids.
"""

import numpy as np
import pytest

from netfrak.errors import (
    BadLocation,
    BadSegmentIndex,
    BadSpacing,
    CrossingSegments,
    Disconnected,
    DuplicateSegment,
    EmptyNetwork,
    NotSimple,
    TooFarFromNetwork,
    ZeroLengthSegment,
)
from netfrak.geometry import (
    PointPattern,
    boundary_distance,
    build_network,
    erosion_contains,
    grid_points,
    location,
    location_to_xy,
    quadrature_cells,
    snap_points,
    snap_to_network,
    vertex_location,
)
from netfrak.metric import metric_for


class TestBuildNetwork:
    """Validation performed when a network is built."""

    def test_star_summary(self, star):
        """Test counts, length and boundary of the three-armed star."""
        assert star.n_segments == 3
        assert star.n_vertices == 4
        assert star.total_length == pytest.approx(3.0)
        assert sorted(star.boundary.tolist()) == [1, 2, 3]
        assert star.describe() == "3 segments and 4 nodes, total length 3, 3 boundary nodes"

    def test_square_has_no_boundary(self, square):
        """Test that a closed loop has no degree-1 vertices."""
        assert square.boundary.size == 0
        assert square.total_length == pytest.approx(4.0)

    def test_empty(self):
        with pytest.raises(EmptyNetwork):
            build_network(np.zeros((0, 2)), np.zeros((0, 2), dtype=int))

    def test_zero_length_segment(self):
        with pytest.raises(ZeroLengthSegment):
            build_network([(0, 0), (1, 0), (1, 0)], [(0, 1), (1, 2)])

    def test_self_loop_segment(self):
        with pytest.raises(ZeroLengthSegment):
            build_network([(0, 0), (1, 0)], [(0, 1), (1, 1)])

    def test_bad_index(self):
        with pytest.raises(BadSegmentIndex):
            build_network([(0, 0), (1, 0)], [(0, 2)])

    def test_duplicate_segment(self):
        with pytest.raises(DuplicateSegment):
            build_network([(0, 0), (1, 0)], [(0, 1), (1, 0)])

    def test_crossing_segments(self):
        """Test that an X without a shared vertex is rejected."""
        with pytest.raises(CrossingSegments):
            build_network([(0, 0), (1, 1), (0, 1), (1, 0)], [(0, 1), (2, 3)])

    def test_t_junction_without_vertex(self):
        """Test that an endpoint touching another segment's interior is rejected."""
        with pytest.raises(CrossingSegments):
            build_network([(0, 0), (2, 0), (1, 0), (1, 1)], [(0, 1), (2, 3)])

    def test_disconnected(self):
        with pytest.raises(Disconnected):
            build_network([(0, 0), (1, 0), (5, 5), (6, 5)], [(0, 1), (2, 3)])

    def test_network_is_read_only(self, star):
        with pytest.raises(ValueError):
            star.lengths[0] = 10.0


class TestLocations:
    """Canonical locations and coordinates."""

    def test_shared_vertex_compares_equal(self, star):
        """Test that a vertex reached from different segments is one location."""
        assert location(star, 1, 0.0) == location(star, 0, 0.0)
        assert location(star, 2, 0.0) == vertex_location(star, 0)

    def test_far_end_is_canonical(self, seg1):
        u = location(seg1, 0, 1.0)
        assert u == vertex_location(seg1, 1)

    def test_offset_out_of_range(self, seg1):
        with pytest.raises(BadLocation):
            location(seg1, 0, 1.5)
        with pytest.raises(BadLocation):
            location(seg1, 3, 0.5)

    def test_location_to_xy(self, star):
        xy = location_to_xy(star, location(star, 1, 0.25))
        np.testing.assert_allclose(xy, [0.0, 0.25])

    def test_snap_to_network(self, seg1):
        u = snap_to_network(seg1, (0.3, 1e-7), tol=1e-3)
        assert u.segment == 0
        assert u.offset == pytest.approx(0.3)

    def test_snap_too_far(self, seg1):
        with pytest.raises(TooFarFromNetwork):
            snap_to_network(seg1, (0.5, 1.0), tol=1e-3)

    def test_snap_points_pattern(self, star):
        pattern = snap_points(star, np.array([[0.5, 0.0], [0.0, 0.75], [-0.2, 0.0]]), tol=1e-6)
        assert len(pattern) == 3
        np.testing.assert_allclose(pattern.offsets, [0.5, 0.75, 0.2])
        np.testing.assert_allclose(pattern.xy, [[0.5, 0.0], [0.0, 0.75], [-0.2, 0.0]])


class TestPointPattern:
    """Point pattern construction and helpers."""

    def test_not_simple(self, seg1):
        with pytest.raises(NotSimple):
            PointPattern(seg1, [0, 0], [0.5, 0.5])

    def test_coincident_vertex_points_are_not_simple(self, star):
        """Test that the same vertex given through two segments is detected."""
        with pytest.raises(NotSimple):
            PointPattern(star, [0, 1], [0.0, 0.0])

    def test_subset_and_metadata(self, seg1):
        pattern = PointPattern(seg1, [0, 0, 0], [0.1, 0.5, 0.9], metadata={"model": "x"})
        sub = pattern.subset(np.array([True, False, True]))
        np.testing.assert_allclose(sub.offsets, [0.1, 0.9])
        assert sub.metadata == {"model": "x"}
        tagged = sub.with_metadata(extra=1)
        assert tagged.metadata == {"model": "x", "extra": 1}
        assert sub.metadata == {"model": "x"}

    def test_iteration(self, seg1):
        pattern = PointPattern(seg1, [0, 0], [0.25, 0.75])
        assert [u.offset for u in pattern] == [0.25, 0.75]
        assert pattern[1].offset == 0.75

    def test_empty(self, seg1):
        assert len(PointPattern.empty(seg1)) == 0


class TestGrids:
    """Grid points, quadrature cells and erosion."""

    def test_grid_points_midpoints(self, seg1):
        grid = grid_points(seg1, 0.1)
        assert len(grid) == 10
        np.testing.assert_allclose(grid.offsets, (np.arange(10) + 0.5) * 0.1)
        assert grid.metadata["grid_spacing"] == 0.1

    def test_grid_points_star(self, star):
        grid = grid_points(star, 0.25)
        assert len(grid) == 12
        assert np.all(grid.offsets > 0) and np.all(grid.offsets < 1)

    def test_bad_spacing(self, seg1):
        with pytest.raises(BadSpacing):
            grid_points(seg1, 1.0)
        with pytest.raises(BadSpacing):
            grid_points(seg1, -0.1)

    def test_quadrature_cells_cover_network(self, star):
        mids, lengths = quadrature_cells(star, 0.3)
        assert lengths.sum() == pytest.approx(star.total_length)
        assert np.all(lengths <= 0.3 + 1e-12)
        assert len(mids) == 12

    def test_boundary_distance(self, star, square):
        pattern = PointPattern(star, [0, 1, 2], [0.3, 0.9, 0.5])
        bd = boundary_distance(star, metric_for(star), pattern)
        np.testing.assert_allclose(bd, [0.7, 0.1, 0.5])
        loop = PointPattern(square, [0], [0.5])
        assert np.isinf(boundary_distance(square, metric_for(square), loop)).all()

    def test_erosion_contains(self, star):
        metric = metric_for(star)
        u = location(star, 0, 0.25)
        assert erosion_contains(star, metric, 0.75, u)
        assert not erosion_contains(star, metric, 0.76, u)
        assert erosion_contains(star, metric, 0.0, vertex_location(star, 1))
