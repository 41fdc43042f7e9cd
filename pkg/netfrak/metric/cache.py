"""
Vertex distance cache.

This module provides a thread-safe memo of single-source shortest-path rows,
allowing worker threads that evaluate distance fields from nearby centres to
share the vertex distances they have already computed.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

# Memory budget for cached rows, in float64 entries (~256 MiB).
DEFAULT_BUDGET_ENTRIES = 32 * 1024 * 1024


class VertexDistanceCache:
    """
    Least-recently-used store of Dijkstra rows keyed by source vertex.

    Each row holds the graph distance from one vertex to every vertex of the
    network. Rows are computed on demand in batches and evicted oldest-first
    once ``max_rows`` is reached.

    Thread-safe: lookups and insertions are serialised by a lock; Dijkstra runs
    outside the lock, so two threads may occasionally compute the same row.

    Attributes:
        graph: Symmetric sparse adjacency weighted by segment length.
        max_rows: Maximum number of rows kept.
    """

    def __init__(self, graph: csr_matrix, max_rows: Optional[int] = None) -> None:
        """
        Initialize the cache.

        Args:
            graph: Network adjacency matrix.
            max_rows: Optional row limit. If None, derived from a fixed memory
                budget and the number of vertices.
        """
        self.graph = graph
        n_vertices = graph.shape[0]
        if max_rows is None:
            max_rows = max(2, DEFAULT_BUDGET_ENTRIES // max(1, n_vertices))
        self.max_rows = int(max_rows)
        self._rows: "OrderedDict[int, np.ndarray]" = OrderedDict()
        self._lock = threading.Lock()
        self._hits = 0
        self._misses = 0

    def get(self, vertex: int) -> Optional[np.ndarray]:
        """
        Retrieve a cached row.

        Returns:
            Read-only distance row, or None if ``vertex`` is not cached.
        """
        with self._lock:
            row = self._rows.get(vertex)
            if row is None:
                self._misses += 1
                return None
            self._hits += 1
            self._rows.move_to_end(vertex)
            return row

    def put(self, vertex: int, row: np.ndarray) -> None:
        """Store a row, replacing any existing entry for ``vertex``."""
        row = np.asarray(row, dtype=float)
        row.setflags(write=False)
        with self._lock:
            self._rows[vertex] = row
            self._rows.move_to_end(vertex)
            while len(self._rows) > self.max_rows:
                self._rows.popitem(last=False)

    def rows(self, vertices: Sequence[int]) -> np.ndarray:
        """
        Distance rows for several source vertices, computing missing ones in
        a single Dijkstra call.

        Returns:
            Array of shape (len(vertices), V).
        """
        vertices = [int(v) for v in vertices]
        found: Dict[int, np.ndarray] = {}
        missing = []
        for v in dict.fromkeys(vertices):
            row = self.get(v)
            if row is None:
                missing.append(v)
            else:
                found[v] = row
        if missing:
            computed = dijkstra(self.graph, directed=False, indices=missing)
            for v, row in zip(missing, np.atleast_2d(computed)):
                self.put(v, row)
                found[v] = row
        if not vertices:
            return np.zeros((0, self.graph.shape[0]))
        return np.stack([found[v] for v in vertices])

    def get_cache_stats(self) -> Dict[str, int]:
        """
        Get statistics about cache use.

        Returns:
            Dictionary with keys: total, hits, misses.
        """
        with self._lock:
            return {"total": len(self._rows), "hits": self._hits, "misses": self._misses}
