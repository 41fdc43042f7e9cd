"""
CSV readers and writers.

Networks are read as one segment per row (``x1,y1,x2,y2``); endpoints closer
than the deduplication tolerance become one vertex. Patterns are read as
``x,y`` and snapped, or taken verbatim from ``segment,offset`` columns when a
file was written by netfrak. Floats are written with 17 significant digits and
undefined values as empty cells.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..errors import InputFormatError
from ..geometry import LinearNetwork, PointPattern, build_network, snap_points
from ..geometry.network import COORD_TOL_FRAC

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.17g"
NETWORK_COLUMNS = ("x1", "y1", "x2", "y2")
PATTERN_COLUMNS = ("x", "y")


def _read(path: PathLike, required: Sequence[str], what: str) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise InputFormatError(f"{what} file not found: {path}")
    try:
        df = pd.read_csv(
            path, encoding="utf-8", skipinitialspace=True, float_precision="round_trip"
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InputFormatError(f"{path}: cannot parse {what} CSV: {e}") from e
    df.columns = [str(c).strip() for c in df.columns]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise InputFormatError(
            f"{path}: {what} CSV needs columns {', '.join(required)}; "
            f"missing {', '.join(missing)}"
        )
    for col in required:
        values = pd.to_numeric(df[col], errors="coerce")
        if values.isna().any():
            row = int(np.flatnonzero(values.isna().to_numpy())[0])
            raise InputFormatError(f"{path}: non-numeric {col!r} in data row {row + 1}")
        df[col] = values.astype(float)
    return df


def dedupe_vertices(ends: np.ndarray, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Merge endpoint coordinates closer than ``tol``.

    Returns:
        (vertex coordinates, vertex index per endpoint). Each vertex takes the
        coordinates of its first endpoint in file order.
    """
    m = ends.shape[0]
    pairs = cKDTree(ends).query_pairs(tol, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    _, labels = connected_components(graph, directed=False)
    # Renumber clusters by first appearance so vertex order follows the file.
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    index = remap[labels]
    vertices = ends[np.sort(first)]
    return vertices, index


def read_network_csv(path: PathLike, dedupe_tol: Optional[float] = None) -> LinearNetwork:
    """Read and validate a network from an ``x1,y1,x2,y2`` CSV file."""
    df = _read(path, NETWORK_COLUMNS, "network")
    coords = df[list(NETWORK_COLUMNS)].to_numpy(dtype=float)
    if coords.shape[0] == 0:
        return build_network(np.zeros((0, 2)), np.zeros((0, 2), dtype=np.int64))
    ends = coords.reshape(-1, 2)
    if dedupe_tol is None:
        span = ends.max(axis=0) - ends.min(axis=0)
        dedupe_tol = COORD_TOL_FRAC * float(np.hypot(*span))
    vertices, index = dedupe_vertices(ends, dedupe_tol)
    return build_network(vertices, index.reshape(-1, 2))


def read_pattern_csv(
    path: PathLike, net: LinearNetwork, tol: Optional[float] = None
) -> PointPattern:
    """
    Read a pattern. ``segment,offset`` columns are used as-is when present;
    otherwise ``x,y`` are snapped with tolerance ``tol`` (default 1e-6 * diameter).
    """
    df = _read(path, PATTERN_COLUMNS, "pattern")
    if {"segment", "offset"} <= set(df.columns):
        segs = pd.to_numeric(df["segment"], errors="coerce")
        offs = pd.to_numeric(df["offset"], errors="coerce")
        if segs.isna().any() or offs.isna().any():
            raise InputFormatError(f"{path}: non-numeric segment/offset values")
        return PointPattern(net, segs.to_numpy().astype(np.int64), offs.to_numpy(dtype=float))
    if tol is None:
        tol = 1e-6 * net.diameter
    return snap_points(net, df[list(PATTERN_COLUMNS)].to_numpy(dtype=float), tol)


def pattern_frame(pattern: PointPattern) -> pd.DataFrame:
    xy = pattern.xy
    return pd.DataFrame(
        {
            "x": xy[:, 0],
            "y": xy[:, 1],
            "segment": pattern.segments.astype(np.int64),
            "offset": pattern.offsets,
        }
    )


def write_pattern_csv(pattern: PointPattern, path: PathLike) -> None:
    write_frame(pattern_frame(pattern), path)


def write_frame(df: pd.DataFrame, path: PathLike) -> None:
    """Write a frame with 17 significant digits, NaN as empty cells, LF endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
