"""Point patterns on linear networks under the shortest-path metric."""

__version__ = "0.1.0"

from .errors import InvariantViolation, NetfrakError, UserError  # noqa: E402
from .geometry import (  # noqa: E402
    LinearNetwork,
    NetworkLocation,
    PointPattern,
    build_network,
    grid_points,
    snap_points,
)
from .metric import ShortestPathMetric, metric_for, shortest_path_distance  # noqa: E402

__all__ = [
    "InvariantViolation",
    "LinearNetwork",
    "NetfrakError",
    "NetworkLocation",
    "PointPattern",
    "ShortestPathMetric",
    "UserError",
    "__version__",
    "build_network",
    "grid_points",
    "metric_for",
    "shortest_path_distance",
    "snap_points",
]
