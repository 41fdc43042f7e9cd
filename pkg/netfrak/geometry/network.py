"""
Linear networks: finite unions of straight segments meeting at shared vertices.

A network is validated once at construction and is immutable afterwards, so it
can be shared freely between worker threads.
"""

from __future__ import annotations

from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np
import shapely
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from shapely.strtree import STRtree

from ..errors import (
    BadLocation,
    BadSegmentIndex,
    CrossingSegments,
    Disconnected,
    DuplicateSegment,
    EmptyNetwork,
    ZeroLengthSegment,
)

# Coordinate tolerance relative to the bounding-box diameter.
COORD_TOL_FRAC = 1e-9
# Simplicity / vertex-snapping tolerance relative to total length.
SIMPLE_TOL_FRAC = 1e-9


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class LinearNetwork:
    """
    Planar graph of straight segments carrying arc-length measure.

    Attributes:
        vertices: (V, 2) vertex coordinates.
        segments: (S, 2) vertex index pairs; segment i runs from a=segments[i, 0]
            to b=segments[i, 1] and offsets are measured from a.
        lengths: (S,) segment lengths.
        total_length: |L|.
        degrees: (V,) vertex degrees.
        boundary: indices of degree-1 vertices.
    """

    def __init__(self, vertices: np.ndarray, segments: np.ndarray) -> None:
        self.vertices = _readonly(np.asarray(vertices, dtype=float).copy())
        self.segments = _readonly(np.asarray(segments, dtype=np.int64).copy())
        ends = self.vertices[self.segments]
        self.lengths = _readonly(np.hypot(*(ends[:, 1, :] - ends[:, 0, :]).T))
        self.total_length = float(self.lengths.sum())
        n_vertices = self.vertices.shape[0]
        self.degrees = _readonly(
            np.bincount(self.segments.ravel(), minlength=n_vertices).astype(np.int64)
        )
        self.boundary = _readonly(np.flatnonzero(self.degrees == 1))
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        self.bbox = (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))
        self.diameter = float(np.hypot(*(hi - lo)))
        self.coord_tol = COORD_TOL_FRAC * self.diameter
        self.simple_tol = SIMPLE_TOL_FRAC * self.total_length

        adjacency: List[List[Tuple[int, int]]] = [[] for _ in range(n_vertices)]
        for sid, (a, b) in enumerate(self.segments.tolist()):
            adjacency[a].append((b, sid))
            adjacency[b].append((a, sid))
        self.adjacency = tuple(tuple(row) for row in adjacency)

        # Canonical representation of each vertex: lowest-indexed incident segment.
        canon_seg = np.full(n_vertices, -1, dtype=np.int64)
        canon_off = np.zeros(n_vertices, dtype=float)
        for sid in range(self.n_segments - 1, -1, -1):
            a, b = self.segments[sid]
            canon_seg[a], canon_off[a] = sid, 0.0
            canon_seg[b], canon_off[b] = sid, self.lengths[sid]
        self._vertex_seg = _readonly(canon_seg)
        self._vertex_off = _readonly(canon_off)

    # ------------------------------------------------------------------
    # Sizes
    # ------------------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_segments(self) -> int:
        return int(self.segments.shape[0])

    def describe(self) -> str:
        return (
            f"{self.n_segments} segments and {self.n_vertices} nodes, "
            f"total length {self.total_length:.17g}, {len(self.boundary)} boundary nodes"
        )

    # ------------------------------------------------------------------
    # Derived structures (built lazily, shared read-only)
    # ------------------------------------------------------------------

    @cached_property
    def graph(self) -> csr_matrix:
        """Symmetric sparse adjacency matrix weighted by segment length."""
        a, b = self.segments[:, 0], self.segments[:, 1]
        rows = np.concatenate([a, b])
        cols = np.concatenate([b, a])
        data = np.concatenate([self.lengths, self.lengths])
        return csr_matrix((data, (rows, cols)), shape=(self.n_vertices, self.n_vertices))

    @cached_property
    def lines(self) -> np.ndarray:
        return shapely.linestrings(self.vertices[self.segments])

    @cached_property
    def tree(self) -> STRtree:
        return STRtree(self.lines)

    # ------------------------------------------------------------------
    # Locations
    # ------------------------------------------------------------------

    def vertex_location(self, vertex: int) -> Tuple[int, float]:
        """Canonical (segment, offset) of a vertex."""
        return int(self._vertex_seg[vertex]), float(self._vertex_off[vertex])

    def vertex_locations(self) -> Tuple[np.ndarray, np.ndarray]:
        """Canonical (segment, offset) arrays for every vertex, in vertex order."""
        return self._vertex_seg, self._vertex_off

    def canonicalize(
        self, segments: np.ndarray, offsets: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Validate (segment, offset) arrays and map vertex positions to their
        canonical representation so equal points compare equal.
        """
        segments = np.asarray(segments, dtype=np.int64).reshape(-1)
        offsets = np.asarray(offsets, dtype=float).reshape(-1)
        if segments.shape != offsets.shape:
            raise BadLocation("segment and offset arrays differ in length")
        if segments.size == 0:
            return segments.copy(), offsets.copy()
        if segments.min() < 0 or segments.max() >= self.n_segments:
            raise BadLocation("segment index out of range")
        if not np.all(np.isfinite(offsets)):
            raise BadLocation("offsets must be finite")
        lengths = self.lengths[segments]
        if np.any(offsets < -self.simple_tol) or np.any(offsets > lengths + self.simple_tol):
            raise BadLocation("offset outside [0, segment length]")
        segments = segments.copy()
        offsets = np.clip(offsets, 0.0, lengths)
        at_a = offsets <= self.simple_tol
        at_b = ~at_a & (offsets >= lengths - self.simple_tol)
        for mask, end in ((at_a, 0), (at_b, 1)):
            if mask.any():
                verts = self.segments[segments[mask], end]
                segments[mask] = self._vertex_seg[verts]
                offsets[mask] = self._vertex_off[verts]
        return segments, offsets

    def xy(self, segments: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        """Planar coordinates of (segment, offset) arrays, shape (n, 2)."""
        segments = np.asarray(segments, dtype=np.int64)
        offsets = np.asarray(offsets, dtype=float)
        if segments.size == 0:
            return np.zeros((0, 2))
        a = self.vertices[self.segments[segments, 0]]
        b = self.vertices[self.segments[segments, 1]]
        frac = (offsets / self.lengths[segments])[:, None]
        return a + frac * (b - a)


# ----------------------------------------------------------------------
# Construction and validation
# ----------------------------------------------------------------------


def _check_crossings(net: LinearNetwork) -> None:
    tol = net.coord_tol
    pairs = net.tree.query(net.lines, predicate="dwithin", distance=tol)
    left, right = pairs
    keep = left < right
    for i, j in zip(left[keep].tolist(), right[keep].tolist()):
        si = set(net.segments[i].tolist())
        sj = set(net.segments[j].tolist())
        shared = si & sj
        if not shared:
            raise CrossingSegments(f"segments {i} and {j} intersect away from a shared vertex")
        (v,) = shared
        oi = (si - {v}).pop()
        oj = (sj - {v}).pop()
        far_i = shapely.points(net.vertices[oi])
        far_j = shapely.points(net.vertices[oj])
        if net.lines[j].distance(far_i) <= tol or net.lines[i].distance(far_j) <= tol:
            raise CrossingSegments(f"segments {i} and {j} overlap")


def build_network(
    vertices: Sequence[Sequence[float]], segments: Sequence[Sequence[int]]
) -> LinearNetwork:
    """
    Build and validate a linear network.

    Args:
        vertices: 2D vertex coordinates.
        segments: (vertex_index_a, vertex_index_b) pairs.

    Returns:
        Validated LinearNetwork.

    Raises:
        EmptyNetwork, BadSegmentIndex, ZeroLengthSegment, DuplicateSegment,
        CrossingSegments, Disconnected.
    """
    verts = np.asarray(vertices, dtype=float)
    segs = np.asarray(segments)
    if segs.size == 0:
        raise EmptyNetwork("a network needs at least one segment")
    if verts.ndim != 2 or verts.shape[1] != 2:
        raise BadSegmentIndex("vertices must be a list of (x, y) pairs")
    if segs.ndim != 2 or segs.shape[1] != 2:
        raise BadSegmentIndex("segments must be a list of (a, b) index pairs")
    if not np.all(np.isfinite(verts)):
        raise ZeroLengthSegment("vertex coordinates must be finite")
    if not np.issubdtype(segs.dtype, np.integer):
        if not np.all(np.equal(np.mod(segs, 1), 0)):
            raise BadSegmentIndex("segment indices must be integers")
    segs = segs.astype(np.int64)
    if segs.min() < 0 or segs.max() >= len(verts):
        raise BadSegmentIndex("segment vertex index out of range")

    net = LinearNetwork(verts, segs)
    short = np.flatnonzero((segs[:, 0] == segs[:, 1]) | (net.lengths <= net.coord_tol))
    if short.size:
        raise ZeroLengthSegment(f"segment {int(short[0])} has zero length")

    keys = np.sort(segs, axis=1)
    _, first, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
    if np.any(counts > 1):
        dup = keys[first[counts > 1][0]]
        raise DuplicateSegment(f"segment ({dup[0]}, {dup[1]}) appears more than once")

    _check_crossings(net)

    n_components, _ = connected_components(net.graph, directed=False)
    if n_components != 1:
        raise Disconnected(f"network has {n_components} connected components")
    return net
