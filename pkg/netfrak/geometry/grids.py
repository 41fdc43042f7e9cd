"""Fixed point sets on networks and r-erosion membership."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Tuple

import numpy as np

from ..errors import BadRGrid, BadSpacing
from .network import LinearNetwork
from .pattern import NetworkLocation, PointPattern

if TYPE_CHECKING:
    from ..metric.base import RegularMetric


def grid_points(net: LinearNetwork, spacing: float) -> PointPattern:
    """
    Cell-midpoint grid: offsets spacing/2, 3*spacing/2, ... on every segment.

    Endpoints are never used, so shared vertices are not counted twice.
    """
    if not (math.isfinite(spacing) and 0.0 < spacing < net.total_length):
        raise BadSpacing(f"grid spacing must lie in (0, {net.total_length:.6g}), got {spacing!r}")
    segs = []
    offs = []
    for sid, length in enumerate(net.lengths.tolist()):
        count = max(0, math.ceil(length / spacing - 0.5))
        mids = (np.arange(count) + 0.5) * spacing
        mids = mids[mids < length]
        segs.append(np.full(mids.size, sid, dtype=np.int64))
        offs.append(mids)
    return PointPattern(
        net,
        np.concatenate(segs),
        np.concatenate(offs),
        metadata={"grid_spacing": float(spacing)},
        check=False,
    )


def quadrature_cells(
    net: LinearNetwork, spacing: float
) -> Tuple[PointPattern, np.ndarray]:
    """
    Split every segment into equal cells no longer than ``spacing``.

    Returns:
        (cell midpoints as a pattern, cell lengths). The lengths sum to |L|.
    """
    if not (math.isfinite(spacing) and spacing > 0.0):
        raise BadSpacing(f"quadrature spacing must be positive, got {spacing!r}")
    counts = np.maximum(1, np.ceil(net.lengths / spacing)).astype(np.int64)
    segs = np.repeat(np.arange(net.n_segments, dtype=np.int64), counts)
    cell = net.lengths / counts
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    local = np.arange(segs.size) - np.repeat(starts, counts)
    offs = (local + 0.5) * cell[segs]
    mids = PointPattern(net, segs, offs, metadata={"quad_spacing": float(spacing)}, check=False)
    return mids, cell[segs]


def boundary_distance(
    net: LinearNetwork, metric: "RegularMetric", pattern: PointPattern
) -> np.ndarray:
    """d_L(u, boundary) for every u in ``pattern``; +inf when the boundary is empty."""
    if len(net.boundary) == 0:
        return np.full(len(pattern), np.inf)
    return metric.vertex_set_distance(net.boundary, pattern.segments, pattern.offsets)


def erosion_contains(
    net: LinearNetwork, metric: "RegularMetric", r: float, u: NetworkLocation
) -> bool:
    """True iff u lies in the r-erosion, i.e. d_L(u, boundary) >= r."""
    if not r >= 0:
        raise BadRGrid(f"erosion radius must be >= 0, got {r!r}")
    single = PointPattern.from_locations(net, [u], check=False)
    return bool(boundary_distance(net, metric, single)[0] >= r)
