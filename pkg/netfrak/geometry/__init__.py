"""Linear networks, locations, point patterns and fixed point sets."""

from .grids import boundary_distance, erosion_contains, grid_points, quadrature_cells
from .network import LinearNetwork, build_network
from .pattern import NetworkLocation, PointPattern, location, location_to_xy, vertex_location
from .snap import snap_points, snap_to_network

__all__ = [
    "LinearNetwork",
    "NetworkLocation",
    "PointPattern",
    "boundary_distance",
    "build_network",
    "erosion_contains",
    "grid_points",
    "location",
    "location_to_xy",
    "quadrature_cells",
    "snap_points",
    "snap_to_network",
    "vertex_location",
]
