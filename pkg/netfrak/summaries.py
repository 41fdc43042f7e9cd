"""
Summary functions of point patterns on linear networks.

Empty-space F, nearest-neighbour H, their ratio J and the geometrically
corrected K function, each in an inhomogeneous variant (plug-in intensity
ratios) and a homogeneous variant (ratios replaced by 1). Minus sampling is
applied through the r-erosion of the network; values are undefined (NaN)
wherever the eroded set holds no centre.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import (
    BadBandwidth,
    BadRGrid,
    EmptyGrid,
    GridMismatch,
    NonPositiveIntensityAtDataPoint,
    RMaxExceedsR,
)
from .geometry import LinearNetwork, PointPattern, boundary_distance, grid_points
from .intensity import (
    FLOOR_EPS,
    QUAD_FRACTION,
    TRUNCATE_SIGMAS,
    IntensitySurface,
    KernelIntensity,
    RhoBar,
    rho_bar,
    scott_bandwidth,
)
from .metric import RegularMetric, ShortestPathMetric, global_r_max, metric_for
from .settings import worker_count

logger = logging.getLogger(__name__)

RMAX_FRAC = 0.45
NR = 513
GRID_TARGET = 1000

MODES = ("inhom", "hom")
STATS = ("f", "h", "j", "k")

# Centres handed to one worker task.
_CENTRE_CHUNK = 64

Progress = Callable[[str], None]


def _no_progress(msg: str) -> None:
    pass


@dataclass
class SummaryEstimate:
    """
    One estimated summary curve.

    Attributes:
        name: "F", "H", "J" or "K".
        r: Strictly increasing distances with r[0] = 0.
        values: Estimates, NaN where undefined.
        defined: True where the estimate exists.
        n_grid: N(I within the r-erosion) per r; None when no grid was used (K,
            or H without a grid).
        n_points: N(X within the r-erosion) per r.
        sum_products: Sum of ball products over retained centres (F and H).
        n_centers: Number of retained centres (F and H).
        metadata: Run parameters (mode, |L|, R, rho-bar, bandwidth, ...).
    """

    name: str
    r: np.ndarray
    values: np.ndarray
    defined: np.ndarray
    n_grid: Optional[np.ndarray]
    n_points: np.ndarray
    sum_products: Optional[np.ndarray] = None
    n_centers: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "r": self.r,
                "value": np.where(self.defined, self.values, np.nan),
                "defined": self.defined.astype(np.int64),
                "n_grid": _count_column(self.n_grid, self.r.size),
                "n_points": self.n_points.astype(np.int64),
            }
        )


def _count_column(counts: Optional[np.ndarray], size: int) -> pd.Series:
    """Integer column, empty cells when there are no counts."""
    if counts is None:
        return pd.Series(pd.array([pd.NA] * size, dtype="Int64"))
    return pd.Series(counts.astype(np.int64))


# ----------------------------------------------------------------------
# r grids and references
# ----------------------------------------------------------------------


def check_r_grid(r: Sequence[float]) -> np.ndarray:
    """Validate an r grid: finite, strictly increasing, starting at 0."""
    r = np.asarray(r, dtype=float).reshape(-1)
    if r.size == 0 or not np.all(np.isfinite(r)):
        raise BadRGrid("r grid must be a nonempty list of finite values")
    if r[0] != 0.0:
        raise BadRGrid(f"r grid must start at 0, got {r[0]!r}")
    if r.size > 1 and not np.all(np.diff(r) > 0):
        raise BadRGrid("r grid must be strictly increasing")
    return r


def default_r_grid(R: float, rmax_frac: float = RMAX_FRAC, nr: int = NR) -> np.ndarray:
    """``nr`` equally spaced values on [0, rmax_frac * R]."""
    if not (0.0 < rmax_frac < 1.0):
        raise BadRGrid(f"rmax fraction must lie in (0, 1), got {rmax_frac!r}")
    if nr < 2:
        raise BadRGrid(f"r grid needs at least 2 values, got {nr}")
    if not (math.isfinite(R) and R > 0):
        raise BadRGrid(f"R must be positive and finite, got {R!r}")
    return np.linspace(0.0, rmax_frac * R, int(nr))


def poisson_reference(stat: str, r: np.ndarray, rho: float = 1.0) -> np.ndarray:
    """Theoretical value under a Poisson process: 1 - exp(-rho r), 1 or r."""
    r = np.asarray(r, dtype=float)
    stat = _normalise_stat(stat)
    if stat in ("f", "h"):
        return -np.expm1(-rho * r)
    if stat == "j":
        return np.ones_like(r)
    return r.copy()


def _normalise_stat(stat: str) -> str:
    s = stat.lower()
    if s == "g":
        s = "h"
    if s not in STATS:
        raise BadRGrid(f"unknown summary statistic {stat!r}")
    return s


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise BadRGrid(f"mode must be one of {MODES}, got {mode!r}")
    return mode


# ----------------------------------------------------------------------
# Shared machinery
# ----------------------------------------------------------------------


def _erosion_counts(bd: np.ndarray, r: np.ndarray) -> np.ndarray:
    """#{u : d(u, boundary) >= r} for each r."""
    s = np.sort(bd)
    return (s.size - np.searchsorted(s, r, side="left")).astype(np.int64)


def _data_ratios(
    pattern: PointPattern,
    mode: str,
    surface: Optional[IntensitySurface],
    rbar: Optional[float],
) -> np.ndarray:
    """rho-bar / rho(x) per data point, or ones in homogeneous mode."""
    if mode == "hom" or len(pattern) == 0:
        return np.ones(len(pattern))
    if surface is None or rbar is None:
        raise NonPositiveIntensityAtDataPoint("inhomogeneous mode needs a surface and rho-bar")
    if not rbar > 0:
        raise NonPositiveIntensityAtDataPoint(f"rho-bar must be positive, got {rbar!r}")
    rho = surface.evaluate(pattern)
    bad = np.flatnonzero(~(rho > 0))
    if bad.size:
        raise NonPositiveIntensityAtDataPoint(
            f"intensity at data point {int(bad[0])} is {rho[bad[0]]!r}"
        )
    return rbar / rho


def _rbar_value(rbar: Union[RhoBar, float, None]) -> Optional[float]:
    if rbar is None:
        return None
    if isinstance(rbar, RhoBar):
        return rbar.value
    return float(rbar)


@dataclass
class _Products:
    rows: np.ndarray  # (centres, r) products, NaN where the centre is eroded
    bad_factors: int


def _ball_products(
    metric: RegularMetric,
    centres: PointPattern,
    centre_bd: np.ndarray,
    data: PointPattern,
    ratios: np.ndarray,
    r: np.ndarray,
    tol: float,
    workers: int,
    progress: Progress,
    label: str,
) -> _Products:
    """
    Per-centre products prod_x (1 - ratio_x * w(u, d(u, x))) over data points
    with tol < d(u, x) <= r, for every r in the grid where d(u, boundary) >= r.
    """
    n_centres = len(centres)
    rows = np.full((n_centres, r.size), np.nan)
    bad = np.zeros(n_centres, dtype=np.int64)
    r_max = float(r[-1])

    def run(lo: int) -> None:
        hi = min(lo + _CENTRE_CHUNK, n_centres)
        chunk = centres.subset(np.arange(lo, hi))
        if isinstance(metric, ShortestPathMetric):
            fields = metric.fields(chunk)
        else:
            fields = (metric.field(u) for u in chunk)
        for k, f in zip(range(lo, hi), fields):
            limit = min(float(centre_bd[k]), r_max)
            row = np.ones(r.size)
            if len(data) and limit > tol:
                d = f.evaluate(data.segments, data.offsets)
                inside = np.flatnonzero((d > tol) & (d <= limit))
                if inside.size:
                    dist = d[inside]
                    w = metric.field_weights(centres[k], f, dist)
                    factors = 1.0 - ratios[inside] * w
                    bad[k] = int(np.count_nonzero((factors < 0.0) | (factors > 1.0)))
                    order = np.argsort(dist, kind="stable")
                    cum = np.cumprod(factors[order])
                    idx = np.searchsorted(dist[order], r, side="right")
                    row = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 1.0)
            row[r > centre_bd[k]] = np.nan
            rows[k] = row

    starts = list(range(0, n_centres, _CENTRE_CHUNK))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for done, _ in enumerate(pool.map(run, starts), start=1):
            progress(f"{label}: {min(done * _CENTRE_CHUNK, n_centres)}/{n_centres} centres")
    return _Products(rows, int(bad.sum()))


def _column_fsum(rows: np.ndarray) -> np.ndarray:
    """Compensated column sums ignoring NaN."""
    out = np.zeros(rows.shape[1])
    for j in range(rows.shape[1]):
        col = rows[:, j]
        out[j] = math.fsum(col[~np.isnan(col)].tolist())
    return out


def _one_minus_mean(
    products: _Products, n_retained: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    sums = _column_fsum(products.rows)
    defined = n_retained > 0
    values = np.full(sums.shape, np.nan)
    values[defined] = 1.0 - sums[defined] / n_retained[defined]
    values[0] = 0.0 if defined[0] else np.nan
    return values, defined, sums


def _warn_bad_factors(products: _Products, name: str) -> None:
    if products.bad_factors:
        logger.warning(
            "%s: %d product factors fell outside [0, 1]; rho-bar exceeds the intensity "
            "at some data points (floor engaged?)",
            name,
            products.bad_factors,
        )


def _base_metadata(
    net: LinearNetwork,
    metric: RegularMetric,
    pattern: PointPattern,
    mode: str,
    rbar: Union[RhoBar, float, None],
) -> Dict[str, Any]:
    meta: Dict[str, Any] = {
        "n": len(pattern),
        "total_length": net.total_length,
        "mode": mode,
        "metric": metric.get_metric_name(),
    }
    if isinstance(rbar, RhoBar):
        meta.update(rbar.as_metadata())
    elif rbar is not None:
        meta["rho_bar"] = float(rbar)
    return meta


# ----------------------------------------------------------------------
# Estimators
# ----------------------------------------------------------------------


def estimate_F(
    net: LinearNetwork,
    metric: RegularMetric,
    pattern: PointPattern,
    surface: Optional[IntensitySurface],
    rbar: Union[RhoBar, float, None],
    grid: PointPattern,
    r_grid: Sequence[float],
    mode: str = "inhom",
    tol: Optional[float] = None,
    workers: Optional[int] = None,
    progress: Optional[Progress] = None,
) -> SummaryEstimate:
    """
    Empty-space function estimate.

    F(r) = 1 - mean over eroded grid centres u of
    prod_{x in X, d(u,x) <= r} (1 - rho_bar * w(u, d(u,x)) / rho(x)).

    Raises:
        EmptyGrid: the grid has no points.
        NonPositiveIntensityAtDataPoint: rho(x) <= 0 at a data point.
    """
    mode = _check_mode(mode)
    r = check_r_grid(r_grid)
    if len(grid) == 0:
        raise EmptyGrid("empty-space estimation needs a nonempty grid")
    tol = net.simple_tol if tol is None else tol
    ratios = _data_ratios(pattern, mode, surface, _rbar_value(rbar))
    grid_bd = boundary_distance(net, metric, grid)
    data_bd = boundary_distance(net, metric, pattern)
    products = _ball_products(
        metric,
        grid,
        grid_bd,
        pattern,
        ratios,
        r,
        tol,
        workers or worker_count(),
        progress or _no_progress,
        "F",
    )
    _warn_bad_factors(products, "F")
    n_grid = _erosion_counts(grid_bd, r)
    values, defined, sums = _one_minus_mean(products, n_grid)
    meta = _base_metadata(net, metric, pattern, mode, rbar)
    meta["n_grid_points"] = len(grid)
    meta["grid_spacing"] = grid.metadata.get("grid_spacing")
    return SummaryEstimate(
        name="F",
        r=r,
        values=values,
        defined=defined,
        n_grid=n_grid,
        n_points=_erosion_counts(data_bd, r),
        sum_products=sums,
        n_centers=n_grid.copy(),
        metadata=meta,
    )


def estimate_H(
    net: LinearNetwork,
    metric: RegularMetric,
    pattern: PointPattern,
    surface: Optional[IntensitySurface],
    rbar: Union[RhoBar, float, None],
    r_grid: Sequence[float],
    mode: str = "inhom",
    grid: Optional[PointPattern] = None,
    tol: Optional[float] = None,
    workers: Optional[int] = None,
    progress: Optional[Progress] = None,
) -> SummaryEstimate:
    """
    Nearest-neighbour distance distribution estimate.

    As estimate_F with the data points themselves as centres and the centre
    excluded from its own product.
    """
    mode = _check_mode(mode)
    r = check_r_grid(r_grid)
    tol = net.simple_tol if tol is None else tol
    ratios = _data_ratios(pattern, mode, surface, _rbar_value(rbar))
    data_bd = boundary_distance(net, metric, pattern)
    products = _ball_products(
        metric,
        pattern,
        data_bd,
        pattern,
        ratios,
        r,
        tol,
        workers or worker_count(),
        progress or _no_progress,
        "H",
    )
    _warn_bad_factors(products, "H")
    n_points = _erosion_counts(data_bd, r)
    values, defined, sums = _one_minus_mean(products, n_points)
    if grid is not None:
        n_grid = _erosion_counts(boundary_distance(net, metric, grid), r)
    else:
        n_grid = None
    return SummaryEstimate(
        name="H",
        r=r,
        values=values,
        defined=defined,
        n_grid=n_grid,
        n_points=n_points,
        sum_products=sums,
        n_centers=n_points.copy(),
        metadata=_base_metadata(net, metric, pattern, mode, rbar),
    )


def estimate_J(F: SummaryEstimate, H: SummaryEstimate) -> SummaryEstimate:
    """
    J(r) = (1 - H(r)) / (1 - F(r)), undefined where F(r) = 1 or either input
    is undefined. J(0) = 1.
    """
    if F.r.shape != H.r.shape or not np.array_equal(F.r, H.r):
        raise GridMismatch("F and H estimates use different r grids")
    if F.metadata.get("mode") != H.metadata.get("mode"):
        raise GridMismatch("F and H estimates use different intensity modes")
    defined = F.defined & H.defined
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = 1.0 - F.values
        defined &= denom != 0.0
        values = np.where(defined, (1.0 - H.values) / np.where(defined, denom, 1.0), np.nan)
    if defined[0]:
        values[0] = 1.0
    meta = dict(F.metadata)
    meta.update({k: v for k, v in H.metadata.items() if k not in meta})
    return SummaryEstimate(
        name="J",
        r=F.r.copy(),
        values=values,
        defined=defined,
        n_grid=None if F.n_grid is None else F.n_grid.copy(),
        n_points=H.n_points.copy(),
        metadata=meta,
    )


def estimate_K(
    net: LinearNetwork,
    metric: RegularMetric,
    pattern: PointPattern,
    surface: Optional[IntensitySurface],
    r_grid: Sequence[float],
    R: float,
    mode: str = "inhom",
    tol: Optional[float] = None,
    workers: Optional[int] = None,
    progress: Optional[Progress] = None,
) -> SummaryEstimate:
    """
    Geometrically corrected K function.

    K(r) = (1/|L|) sum_{x1 != x2, d(x1,x2) <= r} w(x1, d(x1,x2)) / (rho(x1) rho(x2)),
    with rho replaced by n/|L| in homogeneous mode.

    Raises:
        RMaxExceedsR: the largest r is not below R.
    """
    mode = _check_mode(mode)
    r = check_r_grid(r_grid)
    if not r[-1] < R:
        raise RMaxExceedsR(f"largest r {r[-1]!r} must be below R = {R!r}")
    tol = net.simple_tol if tol is None else tol
    n = len(pattern)
    meta = _base_metadata(net, metric, pattern, mode, None)
    meta["R"] = float(R)
    n_points = np.full(r.size, n, dtype=np.int64)
    if n < 2:
        return SummaryEstimate(
            "K", r, np.zeros(r.size), np.ones(r.size, dtype=bool), None, n_points, metadata=meta
        )
    if mode == "hom":
        rho = np.full(n, n / net.total_length)
    else:
        if surface is None:
            raise NonPositiveIntensityAtDataPoint("inhomogeneous mode needs a surface")
        rho = surface.evaluate(pattern)
        bad = np.flatnonzero(~(rho > 0))
        if bad.size:
            raise NonPositiveIntensityAtDataPoint(
                f"intensity at data point {int(bad[0])} is {rho[bad[0]]!r}"
            )
    rows = np.zeros((n, r.size))
    r_max = float(r[-1])
    progress = progress or _no_progress

    def run(lo: int) -> None:
        hi = min(lo + _CENTRE_CHUNK, n)
        chunk = pattern.subset(np.arange(lo, hi))
        if isinstance(metric, ShortestPathMetric):
            fields = metric.fields(chunk)
        else:
            fields = (metric.field(u) for u in chunk)
        for i, f in zip(range(lo, hi), fields):
            d = f.evaluate(pattern.segments, pattern.offsets)
            inside = np.flatnonzero((d > tol) & (d <= r_max))
            if not inside.size:
                continue
            dist = d[inside]
            w = metric.field_weights(pattern[i], f, dist)
            contrib = w / (rho[i] * rho[inside])
            order = np.argsort(dist, kind="stable")
            cum = np.cumsum(contrib[order])
            idx = np.searchsorted(dist[order], r, side="right")
            rows[i] = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    starts = list(range(0, n, _CENTRE_CHUNK))
    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        for done, _ in enumerate(pool.map(run, starts), start=1):
            progress(f"K: {min(done * _CENTRE_CHUNK, n)}/{n} points")
    values = _column_fsum(rows) / net.total_length
    values[0] = 0.0
    return SummaryEstimate(
        "K", r, values, np.ones(r.size, dtype=bool), None, n_points, metadata=meta
    )


def local_products(
    net: LinearNetwork,
    metric: RegularMetric,
    pattern: PointPattern,
    centres: PointPattern,
    r: float,
    surface: Optional[IntensitySurface] = None,
    rbar: Union[RhoBar, float, None] = None,
    mode: str = "inhom",
    tol: Optional[float] = None,
) -> np.ndarray:
    """
    Per-centre ball products at a single r (NaN for centres outside the
    r-erosion). 1 minus their mean is the F estimate at r.
    """
    mode = _check_mode(mode)
    if not r > 0:
        raise BadRGrid(f"r must be positive, got {r!r}")
    tol = net.simple_tol if tol is None else tol
    ratios = _data_ratios(pattern, mode, surface, _rbar_value(rbar))
    bd = boundary_distance(net, metric, centres)
    products = _ball_products(
        metric, centres, bd, pattern, ratios, np.array([float(r)]), tol, 1, _no_progress, "local"
    )
    return products.rows[:, 0]


# ----------------------------------------------------------------------
# Pipeline used by the command line and the envelope driver
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SummaryConfig:
    """Estimator parameters, defaulting to the packaged configuration."""

    stat: str = "j"
    mode: str = "inhom"
    grid_spacing: Optional[float] = None
    rmax_frac: float = RMAX_FRAC
    nr: int = NR
    bandwidth: Union[str, float] = "scott"
    floor_eps: float = FLOOR_EPS
    quad_fraction: float = QUAD_FRACTION
    truncate: float = TRUNCATE_SIGMAS
    grid_target: int = GRID_TARGET

    @classmethod
    def from_settings(cls, settings: Dict[str, Any], **overrides: Any) -> "SummaryConfig":
        base = cls(
            rmax_frac=float(settings["summary"]["rmax_frac"]),
            nr=int(settings["summary"]["nr"]),
            floor_eps=float(settings["intensity"]["floor_eps"]),
            quad_fraction=float(settings["intensity"]["quad_fraction"]),
            truncate=float(settings["intensity"]["truncate_sigmas"]),
            grid_target=int(settings["geometry"]["grid_target"]),
        )
        return replace(base, **{k: v for k, v in overrides.items() if v is not None})

    def __post_init__(self) -> None:
        object.__setattr__(self, "stat", _normalise_stat(self.stat))
        _check_mode(self.mode)


@dataclass
class SummaryContext:
    """Per-network state shared by every pattern summarised on it."""

    network: LinearNetwork
    metric: ShortestPathMetric
    grid: PointPattern
    R: float
    r: np.ndarray


def prepare_context(
    net: LinearNetwork, config: SummaryConfig, metric: Optional[ShortestPathMetric] = None
) -> SummaryContext:
    """Grid, R and r grid for ``net``; the grid spacing defaults to |L| / grid_target."""
    metric = metric or metric_for(net)
    spacing = config.grid_spacing or net.total_length / config.grid_target
    grid = grid_points(net, spacing)
    if len(grid) == 0:
        raise EmptyGrid(f"grid spacing {spacing!r} leaves no grid points")
    R = global_r_max(net, grid, metric)
    return SummaryContext(net, metric, grid, R, default_r_grid(R, config.rmax_frac, config.nr))


def fit_surface(pattern: PointPattern, config: SummaryConfig) -> KernelIntensity:
    """Kernel intensity with Scott's or a fixed bandwidth."""
    if config.bandwidth == "scott":
        sigma = scott_bandwidth(pattern)
    else:
        sigma = float(config.bandwidth)
    if not (math.isfinite(sigma) and sigma > 0):
        raise BadBandwidth(f"bandwidth must be positive, got {sigma!r}")
    return KernelIntensity(
        pattern.network,
        pattern,
        sigma,
        quad_spacing=config.quad_fraction * sigma,
        truncate=config.truncate,
    )


def compute_summary(
    ctx: SummaryContext,
    pattern: PointPattern,
    config: SummaryConfig,
    surface: Optional[IntensitySurface] = None,
    workers: Optional[int] = None,
    progress: Optional[Progress] = None,
) -> SummaryEstimate:
    """
    Estimate ``config.stat`` for ``pattern``. In inhomogeneous mode the kernel
    surface is fitted from the pattern unless ``surface`` is given.
    """
    net = ctx.network
    rbar: Optional[RhoBar] = None
    extra: Dict[str, Any] = {"R": ctx.R, "grid_spacing": ctx.grid.metadata.get("grid_spacing")}
    if config.mode == "inhom":
        if surface is None:
            surface = fit_surface(pattern, config)
        rbar = rho_bar(surface, ctx.grid, config.floor_eps)
        extra.update(surface.describe())
    kwargs = dict(workers=workers, progress=progress)
    if config.stat == "k":
        est = estimate_K(net, ctx.metric, pattern, surface, ctx.r, ctx.R, config.mode, **kwargs)
    elif config.stat == "f":
        est = estimate_F(
            net, ctx.metric, pattern, surface, rbar, ctx.grid, ctx.r, config.mode, **kwargs
        )
    elif config.stat == "h":
        est = estimate_H(
            net, ctx.metric, pattern, surface, rbar, ctx.r, config.mode, grid=ctx.grid, **kwargs
        )
    else:
        F = estimate_F(
            net, ctx.metric, pattern, surface, rbar, ctx.grid, ctx.r, config.mode, **kwargs
        )
        H = estimate_H(net, ctx.metric, pattern, surface, rbar, ctx.r, config.mode, **kwargs)
        est = estimate_J(F, H)
    est.metadata.update(extra)
    if rbar is not None:
        est.metadata.update(rbar.as_metadata())
    return est


def reference_curve(est: SummaryEstimate) -> Optional[np.ndarray]:
    """Reference line drawn with a curve: 1 for J, r for K, none for F and H."""
    if est.name == "J":
        return np.ones_like(est.r)
    if est.name == "K":
        return est.r.copy()
    return None


__all__: List[str] = [
    "SummaryConfig",
    "SummaryContext",
    "SummaryEstimate",
    "check_r_grid",
    "compute_summary",
    "default_r_grid",
    "estimate_F",
    "estimate_H",
    "estimate_J",
    "estimate_K",
    "fit_surface",
    "local_products",
    "poisson_reference",
    "prepare_context",
    "reference_curve",
]
