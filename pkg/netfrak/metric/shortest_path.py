"""Shortest-path metric: exact geodesic distances, ball boundary counts and D(u)."""

from __future__ import annotations

import logging
import threading
import weakref
from functools import cached_property
from typing import Iterator, Optional, Tuple

import numpy as np
from scipy.sparse.csgraph import dijkstra

from ..errors import EmptyBallBoundary, EmptyGrid
from ..geometry import LinearNetwork, NetworkLocation, PointPattern
from .base import RegularMetric
from .cache import VertexDistanceCache

logger = logging.getLogger(__name__)

# Distances within this fraction of |L| of a level r count as lying on it.
LEVEL_TOL_FRAC = 1e-12
# Centres whose fields are assembled per batch in ``fields``.
FIELD_BATCH = 256
# Upper bound on (pieces x radii) entries evaluated at once.
_COUNT_BLOCK = 4_000_000


class DistanceField:
    """
    Single-source shortest-path solution from ``source``.

    ``vertex_dist[v]`` is the network distance from the source to vertex v.
    A location at offset t on segment (a, b) of length l is at distance
    min(vertex_dist[a] + t, vertex_dist[b] + l - t), except on the source's
    own segment where the direct path |t - t0| is also available.

    Instances are immutable and safe to share between threads.
    """

    def __init__(
        self, network: LinearNetwork, source: NetworkLocation, vertex_dist: np.ndarray
    ) -> None:
        vd = np.asarray(vertex_dist, dtype=float).copy()
        vd.setflags(write=False)
        self.network = network
        self.source = source
        self.vertex_dist = vd
        self.level_tol = LEVEL_TOL_FRAC * network.total_length

    def __repr__(self) -> str:
        return f"DistanceField(source={self.source})"

    def evaluate(self, segments: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        """Distances from the source to many (segment, offset) locations."""
        segments = np.asarray(segments, dtype=np.int64).reshape(-1)
        offsets = np.asarray(offsets, dtype=float).reshape(-1)
        net = self.network
        if segments.size == 0:
            return np.zeros(0)
        ends = net.segments[segments]
        lengths = net.lengths[segments]
        out = np.minimum(
            self.vertex_dist[ends[:, 0]] + offsets,
            self.vertex_dist[ends[:, 1]] + (lengths - offsets),
        )
        own = segments == self.source.segment
        if own.any():
            out[own] = np.minimum(out[own], np.abs(offsets[own] - self.source.offset))
        return out

    def at(self, v: NetworkLocation) -> float:
        return float(self.evaluate(np.array([v.segment]), np.array([v.offset]))[0])

    @cached_property
    def pieces(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Linear pieces of the profile as (start distance, end distance, length).

        Every segment is one piece, except the source segment which is split at
        the source (distance 0) into up to two pieces.
        """
        net = self.network
        vd = self.vertex_dist
        s = self.source.segment
        t0 = self.source.offset
        keep = np.arange(net.n_segments) != s
        a = net.segments[keep, 0]
        b = net.segments[keep, 1]
        start = [vd[a]]
        end = [vd[b]]
        length = [net.lengths[keep]]
        sa, sb = net.segments[s]
        ls = float(net.lengths[s])
        if t0 > 0.0:
            start.append(np.array([vd[sa]]))
            end.append(np.array([0.0]))
            length.append(np.array([t0]))
        if ls - t0 > 0.0:
            start.append(np.array([0.0]))
            end.append(np.array([vd[sb]]))
            length.append(np.array([ls - t0]))
        p = np.concatenate(start)
        q = np.concatenate(end)
        ln = np.concatenate(length)
        for arr in (p, q, ln):
            arr.setflags(write=False)
        return p, q, ln

    @cached_property
    def _sorted_vertex_dist(self) -> np.ndarray:
        return np.sort(self.vertex_dist)

    def boundary_counts(self, radii: np.ndarray) -> np.ndarray:
        """
        c_L(source, r) for every r in ``radii``.

        On each piece the profile rises from p with slope 1 and falls to q with
        slope -1, meeting at (p + q + l) / 2. Level crossings strictly inside a
        piece are counted per piece; crossings at a vertex are counted once
        from the vertex distances.
        """
        radii = np.asarray(radii, dtype=float).reshape(-1)
        out = np.zeros(radii.size, dtype=np.int64)
        if radii.size == 0:
            return out
        eps = self.level_tol
        p, q, ln = self.pieces
        peak = 0.5 * (p + q + ln)
        block = max(1, _COUNT_BLOCK // max(1, p.size))
        for lo in range(0, radii.size, block):
            r = radii[lo : lo + block][None, :]
            below_peak = r <= peak[:, None]
            t_up = r - p[:, None]
            t_down = ln[:, None] - (r - q[:, None])
            inside_up = (t_up > eps) & (t_up < ln[:, None] - eps)
            inside_down = (t_down > eps) & (t_down < ln[:, None] - eps)
            up = below_peak & inside_up
            down = below_peak & inside_down & (t_down - t_up > eps)
            out[lo : lo + block] = up.sum(axis=0) + down.sum(axis=0)
        sv = self._sorted_vertex_dist
        hits = np.searchsorted(sv, radii + eps, side="right") - np.searchsorted(
            sv, radii - eps, side="left"
        )
        out += hits.astype(np.int64)
        # A source sitting on a vertex is not on any sphere of positive radius.
        out[radii <= eps] = 0
        return out

    def farthest(self) -> float:
        """D(source): maximum of the profile over every piece."""
        p, q, ln = self.pieces
        tent = np.abs(p - q) <= ln
        peaks = np.where(tent, 0.5 * (p + q + ln), np.maximum(p, q))
        return float(peaks.max())


class ShortestPathMetric(RegularMetric):
    """
    Shortest-path distance on a linear network.

    Vertex rows are computed with Dijkstra on the vertex graph and memoised in
    a VertexDistanceCache; a field from a location on segment (a, b) combines
    the rows of a and b. The Jacobian is 1 almost everywhere.
    """

    def __init__(
        self,
        network: LinearNetwork,
        cache: Optional[VertexDistanceCache] = None,
    ) -> None:
        self.network = network
        self.cache = cache if cache is not None else VertexDistanceCache(network.graph)

    def get_metric_name(self) -> str:
        return "shortest_path"

    # ------------------------------------------------------------------
    # Fields
    # ------------------------------------------------------------------

    def _assemble(
        self, u: NetworkLocation, row_a: np.ndarray, row_b: np.ndarray
    ) -> DistanceField:
        length = float(self.network.lengths[u.segment])
        vd = np.minimum(u.offset + row_a, (length - u.offset) + row_b)
        return DistanceField(self.network, u, vd)

    def field(self, u: NetworkLocation) -> DistanceField:
        a, b = self.network.segments[u.segment]
        rows = self.cache.rows([int(a), int(b)])
        return self._assemble(u, rows[0], rows[1])

    def fields(self, pattern: PointPattern) -> Iterator[DistanceField]:
        """Fields for every location of ``pattern``, in order, built in batches."""
        net = self.network
        for lo in range(0, len(pattern), FIELD_BATCH):
            segs = pattern.segments[lo : lo + FIELD_BATCH]
            needed = np.unique(net.segments[segs].ravel()).tolist()
            rows = self.cache.rows(needed)
            index = {v: i for i, v in enumerate(needed)}
            for s, t in zip(segs.tolist(), pattern.offsets[lo : lo + FIELD_BATCH].tolist()):
                a, b = net.segments[s]
                yield self._assemble(
                    NetworkLocation(s, t), rows[index[int(a)]], rows[index[int(b)]]
                )

    def pairwise(self, origins: PointPattern, targets: PointPattern) -> np.ndarray:
        """Distance matrix of shape (len(origins), len(targets))."""
        out = np.empty((len(origins), len(targets)))
        for i, f in enumerate(self.fields(origins)):
            out[i] = f.evaluate(targets.segments, targets.offsets)
        return out

    # ------------------------------------------------------------------
    # Weights
    # ------------------------------------------------------------------

    def jacobian_mean(self, u: NetworkLocation, r: float) -> float:
        return 1.0

    def field_weights(self, u: NetworkLocation, field, radii: np.ndarray) -> np.ndarray:
        radii = np.asarray(radii, dtype=float)
        counts = field.boundary_counts(radii)
        if np.any(counts == 0):
            bad = float(radii[np.flatnonzero(counts == 0)[0]])
            raise EmptyBallBoundary(f"no network point lies at distance {bad!r} from {u}")
        return 1.0 / counts

    # ------------------------------------------------------------------
    # Vertex sets
    # ------------------------------------------------------------------

    def vertex_set_distance(
        self, vertices: np.ndarray, segments: np.ndarray, offsets: np.ndarray
    ) -> np.ndarray:
        vertices = np.asarray(vertices, dtype=np.int64)
        segments = np.asarray(segments, dtype=np.int64)
        offsets = np.asarray(offsets, dtype=float)
        if vertices.size == 0:
            return np.full(segments.size, np.inf)
        nearest = dijkstra(self.network.graph, directed=False, indices=vertices, min_only=True)
        ends = self.network.segments[segments]
        lengths = self.network.lengths[segments]
        return np.minimum(nearest[ends[:, 0]] + offsets, nearest[ends[:, 1]] + lengths - offsets)


# ----------------------------------------------------------------------
# Per-network default metric and functional API
# ----------------------------------------------------------------------

_METRICS: "weakref.WeakKeyDictionary[LinearNetwork, ShortestPathMetric]" = (
    weakref.WeakKeyDictionary()
)
_METRICS_LOCK = threading.Lock()


def metric_for(net: LinearNetwork) -> ShortestPathMetric:
    """Shared ShortestPathMetric for ``net`` (one vertex cache per network)."""
    with _METRICS_LOCK:
        metric = _METRICS.get(net)
        if metric is None:
            metric = ShortestPathMetric(net)
            _METRICS[net] = metric
        return metric


def shortest_path_distance(net: LinearNetwork, u: NetworkLocation, v: NetworkLocation) -> float:
    return metric_for(net).distance(u, v)


def distance_field(net: LinearNetwork, u: NetworkLocation) -> DistanceField:
    return metric_for(net).field(u)


def boundary_count(net: LinearNetwork, u: NetworkLocation, r: float) -> int:
    """Number of network points at distance exactly r from u."""
    return metric_for(net).boundary_count(u, r)


def weight(net: LinearNetwork, u: NetworkLocation, r: float) -> float:
    """1 / c_L(u, r); raises EmptyBallBoundary when nothing lies at distance r."""
    return metric_for(net).weight(u, r)


def farthest_distance(net: LinearNetwork, u: NetworkLocation) -> float:
    return metric_for(net).farthest(u)


def global_r_max(
    net: LinearNetwork,
    grid: PointPattern,
    metric: Optional[ShortestPathMetric] = None,
) -> float:
    """
    R, approximated as the minimum of D(u) over the grid and every vertex.

    This is an upper bound on the true minimum over the whole network and
    tightens as the grid spacing shrinks.
    """
    if len(grid) == 0:
        raise EmptyGrid("global_r_max needs at least one grid point")
    metric = metric or metric_for(net)
    vsegs, voffs = net.vertex_locations()
    everything = PointPattern(
        net,
        np.concatenate([grid.segments, vsegs]),
        np.concatenate([grid.offsets, voffs]),
        check=False,
    )
    best = np.inf
    for f in metric.fields(everything):
        best = min(best, f.farthest())
    logger.debug("R over %d candidate centres: %.17g", len(everything), best)
    return float(best)
