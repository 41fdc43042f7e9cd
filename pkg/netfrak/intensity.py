"""
Intensity surfaces on linear networks.

The kernel estimator smooths the planar coordinates of a pattern with an
isotropic Gaussian and divides each point's contribution by the mass its kernel
puts on the network, so the surface integrates to the number of points.
"""

from __future__ import annotations

import itertools
import logging
import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import BadBandwidth, BadSpacing, EmptyGrid, EmptySurface, TooFewPoints
from .geometry import LinearNetwork, NetworkLocation, PointPattern, quadrature_cells
from .settings import worker_count

logger = logging.getLogger(__name__)

TRUNCATE_SIGMAS = 4.0
QUAD_FRACTION = 0.1
FLOOR_EPS = 1e-3

# Data points per normaliser task.
_CHUNK = 512


def _pairs_within(tree: cKDTree, xy: np.ndarray, radius: float):
    """(query index, tree index, distance) for every pair closer than ``radius``."""
    hits = tree.query_ball_point(xy, r=radius)
    counts = np.fromiter((len(h) for h in hits), dtype=np.int64, count=len(hits))
    i = np.repeat(np.arange(len(hits)), counts)
    j = np.fromiter(itertools.chain.from_iterable(hits), dtype=np.int64, count=int(counts.sum()))
    d = np.hypot(*(xy[i] - tree.data[j]).T) if i.size else np.zeros(0)
    return i, j, d


def scott_bandwidth(pattern: PointPattern) -> float:
    """
    Scott's rule of thumb for an isotropic planar Gaussian.

    sigma = n^(-1/6) * sqrt((var_x + var_y) / 2), sample variances (ddof=1).
    """
    n = len(pattern)
    if n < 2:
        raise TooFewPoints(f"Scott bandwidth needs at least 2 points, got {n}")
    xy = pattern.xy
    var = np.var(xy, axis=0, ddof=1)
    return float(n ** (-1.0 / 6.0) * math.sqrt(0.5 * (var[0] + var[1])))


def gaussian_kernel(d: np.ndarray, sigma: float) -> np.ndarray:
    """Isotropic planar Gaussian density as a function of distance."""
    d = np.asarray(d, dtype=float)
    return np.exp(-0.5 * (d / sigma) ** 2) / (2.0 * math.pi * sigma * sigma)


class IntensitySurface(ABC):
    """
    A non-negative intensity on a network, evaluable at any location.

    Attributes:
        network: The network the surface lives on.
        n_points: Point count behind the surface, or None for known functions.
    """

    network: LinearNetwork
    n_points: Optional[int] = None

    @abstractmethod
    def evaluate_xy(self, xy: np.ndarray) -> np.ndarray:
        """Surface values at planar coordinates lying on the network."""

    @abstractmethod
    def upper_bound(self) -> float:
        """A constant that dominates the surface everywhere on the network."""

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Parameters recorded in output metadata."""

    def evaluate(self, pattern: PointPattern) -> np.ndarray:
        if len(pattern) == 0:
            return np.zeros(0)
        return self.evaluate_xy(pattern.xy)

    __call__ = evaluate

    def at(self, u: NetworkLocation) -> float:
        return float(self.evaluate(PointPattern.from_locations(self.network, [u], check=False))[0])

    def total_mass(self, spacing: Optional[float] = None) -> float:
        """Midpoint-rule integral of the surface over the network."""
        spacing = spacing or self.network.total_length / 10_000.0
        mids, lengths = quadrature_cells(self.network, spacing)
        return float(np.dot(self.evaluate(mids), lengths))

    def mass_hint(self) -> float:
        """Expected point count used by the rho-bar floor."""
        if self.n_points is not None:
            return float(self.n_points)
        return self.total_mass()


class ConstantIntensity(IntensitySurface):
    """rho(u) = value everywhere; ``from_pattern`` gives the homogeneous n/|L|."""

    def __init__(self, network: LinearNetwork, value: float, n_points: Optional[int] = None):
        if not (math.isfinite(value) and value >= 0.0):
            raise EmptySurface(f"constant intensity must be finite and >= 0, got {value!r}")
        self.network = network
        self.value = float(value)
        self.n_points = n_points

    @classmethod
    def from_pattern(cls, pattern: PointPattern) -> "ConstantIntensity":
        return cls(pattern.network, len(pattern) / pattern.network.total_length, len(pattern))

    def evaluate_xy(self, xy: np.ndarray) -> np.ndarray:
        return np.full(np.asarray(xy).reshape(-1, 2).shape[0], self.value)

    def upper_bound(self) -> float:
        return self.value

    def total_mass(self, spacing: Optional[float] = None) -> float:
        return self.value * self.network.total_length

    def describe(self) -> Dict[str, Any]:
        return {"surface": "constant", "value": self.value}


class FunctionIntensity(IntensitySurface):
    """
    A known intensity rho(x, y), vectorised over coordinate arrays.

    Negative function values are treated as 0. When ``bound`` is omitted the
    upper bound is the maximum over a fine quadrature grid inflated by
    ``bound_margin``, which is only safe for smooth functions.
    """

    def __init__(
        self,
        network: LinearNetwork,
        func: Callable[[np.ndarray, np.ndarray], np.ndarray],
        bound: Optional[float] = None,
        name: str = "function",
        params: Optional[Dict[str, Any]] = None,
        bound_margin: float = 1.01,
    ) -> None:
        self.network = network
        self.func = func
        self._bound = bound
        self.name = name
        self.params = dict(params or {})
        self.bound_margin = bound_margin

    def evaluate_xy(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        values = np.asarray(self.func(xy[:, 0], xy[:, 1]), dtype=float)
        return np.maximum(np.broadcast_to(values, (xy.shape[0],)), 0.0)

    def upper_bound(self) -> float:
        if self._bound is not None:
            return float(self._bound)
        mids, _ = quadrature_cells(self.network, self.network.total_length / 20_000.0)
        return float(self.evaluate(mids).max() * self.bound_margin)

    def describe(self) -> Dict[str, Any]:
        return {"surface": self.name, **self.params}


class KernelIntensity(IntensitySurface):
    """
    Gaussian kernel estimate with per-data-point network normalisation.

    rho(u) = sum_i k(|u - x_i|) / C(x_i), where C(x_i) is the midpoint-rule
    integral of k(|v - x_i|) over the network. The kernel is truncated at
    ``truncate * sigma`` both in C and in evaluation.
    """

    def __init__(
        self,
        network: LinearNetwork,
        pattern: PointPattern,
        sigma: float,
        quad_spacing: Optional[float] = None,
        truncate: float = TRUNCATE_SIGMAS,
        workers: Optional[int] = None,
    ) -> None:
        if not (math.isfinite(sigma) and sigma > 0.0):
            raise BadBandwidth(f"bandwidth must be a positive finite length, got {sigma!r}")
        if quad_spacing is None:
            quad_spacing = QUAD_FRACTION * sigma
        if not (math.isfinite(quad_spacing) and quad_spacing > 0.0):
            raise BadSpacing(f"quadrature spacing must be positive, got {quad_spacing!r}")
        self.network = network
        self.pattern = pattern
        self.sigma = float(sigma)
        self.quad_spacing = float(quad_spacing)
        self.truncate = float(truncate)
        self.radius = self.truncate * self.sigma
        self.n_points = len(pattern)
        self._workers = workers or worker_count()
        self._mids, self._cell_lengths = quadrature_cells(network, self.quad_spacing)
        self.normalisers = self._normalisers()
        self._data_tree = cKDTree(pattern.xy) if self.n_points else None

    def _normaliser_chunk(self, xy: np.ndarray) -> np.ndarray:
        i, j, d = _pairs_within(self._cell_tree, xy, self.radius)
        contrib = gaussian_kernel(d, self.sigma) * self._cell_lengths[j]
        return np.bincount(i, weights=contrib, minlength=xy.shape[0])

    def _normalisers(self) -> np.ndarray:
        if self.n_points == 0:
            return np.zeros(0)
        self._cell_tree = cKDTree(self._mids.xy)
        xy = self.pattern.xy
        chunks = [xy[lo : lo + _CHUNK] for lo in range(0, xy.shape[0], _CHUNK)]
        with ThreadPoolExecutor(max_workers=self._workers) as pool:
            parts = list(pool.map(self._normaliser_chunk, chunks))
        norms = np.concatenate(parts)
        if np.any(norms <= 0.0):
            # A data point on the network always sees its own cell.
            raise BadBandwidth("kernel puts no mass on the network; bandwidth too small")
        norms.setflags(write=False)
        return norms

    def evaluate_xy(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if self.n_points == 0 or xy.shape[0] == 0:
            return np.zeros(xy.shape[0])
        i, j, d = _pairs_within(self._data_tree, xy, self.radius)
        contrib = gaussian_kernel(d, self.sigma) / self.normalisers[j]
        return np.bincount(i, weights=contrib, minlength=xy.shape[0])

    @cached_property
    def _quadrature_values(self) -> np.ndarray:
        return self.evaluate(self._mids)

    def total_mass(self, spacing: Optional[float] = None) -> float:
        if spacing is not None:
            return super().total_mass(spacing)
        return float(np.dot(self._quadrature_values, self._cell_lengths))

    def upper_bound(self) -> float:
        """
        Maximum over cell midpoints plus slack for the distance to the nearest
        midpoint: every network point is within half a cell of one, each term
        changes at most e^(-1/2) / (2 pi sigma^3) per unit length, and the
        truncation edge adds at most k(radius) per term.
        """
        if self.n_points == 0:
            return 0.0
        half_cell = 0.5 * float(self._cell_lengths.max())
        inv = 1.0 / self.normalisers
        lip = math.exp(-0.5) / (2.0 * math.pi * self.sigma**3)
        edge = float(gaussian_kernel(self.radius, self.sigma))
        slack = float(np.sum(inv)) * (lip * half_cell + edge)
        return float(self._quadrature_values.max()) + slack

    def describe(self) -> Dict[str, Any]:
        return {
            "surface": "kernel",
            "sigma": self.sigma,
            "quad_spacing": self.quad_spacing,
            "truncate": self.truncate,
            "n_points": self.n_points,
        }


def kernel_intensity(
    net: LinearNetwork,
    pattern: PointPattern,
    sigma: float,
    quad_spacing: Optional[float] = None,
    truncate: float = TRUNCATE_SIGMAS,
) -> KernelIntensity:
    return KernelIntensity(net, pattern, sigma, quad_spacing=quad_spacing, truncate=truncate)


def constant_intensity(pattern: PointPattern) -> ConstantIntensity:
    return ConstantIntensity.from_pattern(pattern)


@dataclass(frozen=True)
class RhoBar:
    """Lower bound of an intensity surface, with how it was obtained."""

    value: float
    grid_min: float
    floor: float
    floor_applied: bool

    def as_metadata(self) -> Dict[str, Any]:
        return {
            "rho_bar": self.value,
            "rho_bar_grid_min": self.grid_min,
            "rho_bar_floor": self.floor,
            "rho_bar_floor_applied": self.floor_applied,
        }


def rho_bar(surface: IntensitySurface, grid: PointPattern, floor_eps: float = FLOOR_EPS) -> RhoBar:
    """
    rho-bar = max(min over grid of rho(u), floor_eps * n / |L|).

    Raises:
        EmptyGrid: grid has no points.
        EmptySurface: the surface carries no points (n = 0).
    """
    if len(grid) == 0:
        raise EmptyGrid("rho_bar needs a nonempty grid")
    if not floor_eps > 0:
        raise EmptySurface(f"floor_eps must be positive, got {floor_eps!r}")
    mass = surface.mass_hint()
    if not mass > 0:
        raise EmptySurface("intensity surface is empty (no points)")
    grid_min = float(surface.evaluate(grid).min())
    floor = floor_eps * mass / surface.network.total_length
    applied = grid_min < floor
    if applied:
        logger.warning(
            "rho-bar floor engaged: grid minimum %.6g is below %.6g (floor_eps=%g)",
            grid_min,
            floor,
            floor_eps,
        )
    return RhoBar(max(grid_min, floor), grid_min, floor, applied)
