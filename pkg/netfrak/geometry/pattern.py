"""Locations on a network and point patterns built from them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Iterable, Iterator, Optional

import numpy as np

from ..errors import NotSimple
from .network import LinearNetwork


@dataclass(frozen=True, order=True)
class NetworkLocation:
    """A point on a network: segment index and arc-length offset from endpoint a."""

    segment: int
    offset: float


def location(net: LinearNetwork, segment: int, offset: float) -> NetworkLocation:
    """Validated, canonical NetworkLocation (shared vertices compare equal)."""
    segs, offs = net.canonicalize(np.array([segment]), np.array([offset]))
    return NetworkLocation(int(segs[0]), float(offs[0]))


def vertex_location(net: LinearNetwork, vertex: int) -> NetworkLocation:
    seg, off = net.vertex_location(vertex)
    return NetworkLocation(seg, off)


def location_to_xy(net: LinearNetwork, u: NetworkLocation) -> np.ndarray:
    return net.xy(np.array([u.segment]), np.array([u.offset]))[0]


class PointPattern:
    """
    Ordered set of locations on one network, stored as parallel arrays.

    Patterns are simple: no two points lie within ``net.simple_tol`` network
    distance of each other. Vertex positions are stored canonically, so after
    canonicalisation the only way two points can be that close is on the same
    segment, which is what the check below inspects.
    """

    def __init__(
        self,
        network: LinearNetwork,
        segments: Iterable[int],
        offsets: Iterable[float],
        metadata: Optional[Dict[str, Any]] = None,
        check: bool = True,
    ) -> None:
        segs = np.asarray(list(segments) if not isinstance(segments, np.ndarray) else segments)
        offs = np.asarray(list(offsets) if not isinstance(offsets, np.ndarray) else offsets)
        segs, offs = network.canonicalize(segs, offs)
        if check:
            _check_simple(network, segs, offs)
        segs.setflags(write=False)
        offs.setflags(write=False)
        self.network = network
        self.segments = segs
        self.offsets = offs
        self.metadata: Dict[str, Any] = dict(metadata or {})

    @classmethod
    def empty(cls, network: LinearNetwork) -> "PointPattern":
        return cls(network, np.zeros(0, dtype=np.int64), np.zeros(0), check=False)

    @classmethod
    def from_locations(
        cls, network: LinearNetwork, locations: Iterable[NetworkLocation], **kwargs: Any
    ) -> "PointPattern":
        locs = list(locations)
        return cls(
            network,
            np.array([u.segment for u in locs], dtype=np.int64),
            np.array([u.offset for u in locs], dtype=float),
            **kwargs,
        )

    def __len__(self) -> int:
        return int(self.segments.shape[0])

    @property
    def n(self) -> int:
        return len(self)

    def __iter__(self) -> Iterator[NetworkLocation]:
        for s, t in zip(self.segments.tolist(), self.offsets.tolist()):
            yield NetworkLocation(s, t)

    def __getitem__(self, i: int) -> NetworkLocation:
        return NetworkLocation(int(self.segments[i]), float(self.offsets[i]))

    def __repr__(self) -> str:
        return f"PointPattern(n={self.n}, total_length={self.network.total_length:.6g})"

    @cached_property
    def xy(self) -> np.ndarray:
        arr = self.network.xy(self.segments, self.offsets)
        arr.setflags(write=False)
        return arr

    def subset(self, mask: np.ndarray) -> "PointPattern":
        mask = np.asarray(mask)
        return PointPattern(
            self.network,
            self.segments[mask],
            self.offsets[mask],
            metadata=self.metadata,
            check=False,
        )

    def with_metadata(self, **extra: Any) -> "PointPattern":
        out = self.subset(np.ones(self.n, dtype=bool))
        out.metadata.update(extra)
        return out


def _check_simple(net: LinearNetwork, segs: np.ndarray, offs: np.ndarray) -> None:
    if segs.size < 2:
        return
    order = np.lexsort((offs, segs))
    s = segs[order]
    t = offs[order]
    same = s[1:] == s[:-1]
    close = np.abs(t[1:] - t[:-1]) <= net.simple_tol
    bad = np.flatnonzero(same & close)
    if bad.size:
        k = bad[0]
        raise NotSimple(
            f"points {int(order[k])} and {int(order[k + 1])} coincide "
            f"(segment {int(s[k])}, offset {t[k]:.6g})"
        )
