"""Shared fixture networks."""

from pathlib import Path

import pandas as pd
import pytest

from netfrak.geometry import build_network


def star3(scale: float = 1.0):
    """Three arms of length ``scale`` meeting at vertex 0 (the origin)."""
    return build_network(
        [(0.0, 0.0), (scale, 0.0), (0.0, scale), (-scale, 0.0)],
        [(0, 1), (0, 2), (0, 3)],
    )


@pytest.fixture
def seg1():
    """Single unit segment from (0, 0) to (1, 0)."""
    return build_network([(0.0, 0.0), (1.0, 0.0)], [(0, 1)])


@pytest.fixture
def star():
    return star3()


@pytest.fixture
def square():
    """Unit square loop; no boundary vertices."""
    return build_network(
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        [(0, 1), (1, 2), (2, 3), (3, 0)],
    )


@pytest.fixture
def big_star():
    """STAR3 scaled to arms of length 100, for Monte-Carlo checks."""
    return star3(100.0)


def write_network(net, path: Path) -> Path:
    ends = net.vertices[net.segments]
    pd.DataFrame(
        {"x1": ends[:, 0, 0], "y1": ends[:, 0, 1], "x2": ends[:, 1, 0], "y2": ends[:, 1, 1]}
    ).to_csv(path, index=False)
    return path
