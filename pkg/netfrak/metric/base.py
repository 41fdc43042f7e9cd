"""Abstract base class for regular distance metrics on linear networks."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Protocol

import numpy as np

from ..errors import EmptyBallBoundary
from ..geometry import NetworkLocation


class Field(Protocol):
    """Single-source distance solution evaluable anywhere on the network."""

    def evaluate(self, segments: np.ndarray, offsets: np.ndarray) -> np.ndarray: ...

    def boundary_counts(self, radii: np.ndarray) -> np.ndarray: ...

    def farthest(self) -> float: ...


class RegularMetric(ABC):
    """Interface bundle for a regular distance metric d_L.

    Implementations provide:
    - point-to-point distances and single-source fields
    - geodesic-ball boundary counts c_L(u, r)
    - the harmonic-mean Jacobian J~(u, r) entering the weight
    - farthest reachable distance D(u)
    - distances to a set of vertices (used for r-erosion)
    """

    @abstractmethod
    def get_metric_name(self) -> str:
        """Short identifier written into output metadata."""

    @abstractmethod
    def field(self, u: NetworkLocation) -> Field:
        """Distance field from ``u``."""

    @abstractmethod
    def jacobian_mean(self, u: NetworkLocation, r: float) -> float:
        """J~(u, r): harmonic mean of the Jacobian over the ball boundary."""

    @abstractmethod
    def vertex_set_distance(
        self, vertices: np.ndarray, segments: np.ndarray, offsets: np.ndarray
    ) -> np.ndarray:
        """Distance from each location to the nearest vertex in ``vertices``."""

    def distance(self, u: NetworkLocation, v: NetworkLocation) -> float:
        return float(self.field(u).evaluate(np.array([v.segment]), np.array([v.offset]))[0])

    def boundary_count(self, u: NetworkLocation, r: float) -> int:
        return int(self.field(u).boundary_counts(np.array([float(r)]))[0])

    def farthest(self, u: NetworkLocation) -> float:
        return float(self.field(u).farthest())

    def weight(self, u: NetworkLocation, r: float) -> float:
        """w(u, r) = J~(u, r) / c_L(u, r)."""
        count = self.boundary_count(u, r)
        if count == 0:
            raise EmptyBallBoundary(f"no network point lies at distance {r!r} from {u}")
        return self.jacobian_mean(u, r) / count

    def field_weights(self, u: NetworkLocation, field: Field, radii: np.ndarray) -> np.ndarray:
        """Vectorised w(u, r) for many radii sharing one field; 0 boundary counts raise."""
        radii = np.asarray(radii, dtype=float)
        counts = field.boundary_counts(radii)
        if np.any(counts == 0):
            bad = float(radii[np.flatnonzero(counts == 0)[0]])
            raise EmptyBallBoundary(f"no network point lies at distance {bad!r} from {u}")
        jac = np.array([self.jacobian_mean(u, float(r)) for r in radii]) if radii.size else radii
        return jac / counts
