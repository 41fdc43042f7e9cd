"""Project planar coordinates onto the nearest network segment."""

from __future__ import annotations

from typing import Sequence

import numpy as np
import shapely

from ..errors import BadLocation, TooFarFromNetwork
from .network import LinearNetwork
from .pattern import NetworkLocation, PointPattern


def _project(net: LinearNetwork, xy: np.ndarray, tol: float):
    if not tol > 0:
        raise BadLocation(f"snap tolerance must be positive, got {tol!r}")
    points = shapely.points(xy)
    (src_idx, seg_idx), dist = net.tree.query_nearest(
        points, return_distance=True, all_matches=False
    )
    order = np.argsort(src_idx, kind="stable")
    seg_idx = seg_idx[order]
    dist = dist[order]
    far = np.flatnonzero(dist > tol)
    if far.size:
        k = int(far[0])
        raise TooFarFromNetwork(
            f"point {k} at ({xy[k, 0]:.6g}, {xy[k, 1]:.6g}) is {dist[k]:.6g} from the network "
            f"(tolerance {tol:.6g})"
        )
    offsets = shapely.line_locate_point(net.lines[seg_idx], points)
    return seg_idx.astype(np.int64), np.asarray(offsets, dtype=float)


def snap_to_network(net: LinearNetwork, xy: Sequence[float], tol: float) -> NetworkLocation:
    """Nearest Euclidean projection of ``xy`` onto the network, if within ``tol``."""
    arr = np.asarray(xy, dtype=float).reshape(1, 2)
    segs, offs = _project(net, arr, tol)
    segs, offs = net.canonicalize(segs, offs)
    return NetworkLocation(int(segs[0]), float(offs[0]))


def snap_points(net: LinearNetwork, xy: np.ndarray, tol: float) -> PointPattern:
    """Snap many coordinates at once and return them as a validated pattern."""
    arr = np.asarray(xy, dtype=float).reshape(-1, 2)
    if arr.shape[0] == 0:
        return PointPattern.empty(net)
    segs, offs = _project(net, arr, tol)
    return PointPattern(net, segs, offs)
