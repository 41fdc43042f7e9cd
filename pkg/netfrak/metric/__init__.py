"""Regular distance metrics on linear networks."""

from .base import Field, RegularMetric
from .cache import VertexDistanceCache
from .shortest_path import (
    DistanceField,
    ShortestPathMetric,
    boundary_count,
    distance_field,
    farthest_distance,
    global_r_max,
    metric_for,
    shortest_path_distance,
    weight,
)

__all__ = [
    "DistanceField",
    "Field",
    "RegularMetric",
    "ShortestPathMetric",
    "VertexDistanceCache",
    "boundary_count",
    "distance_field",
    "farthest_distance",
    "global_r_max",
    "metric_for",
    "shortest_path_distance",
    "weight",
]
