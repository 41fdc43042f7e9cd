"""Pointwise Monte-Carlo envelopes under a fitted inhomogeneous Poisson null."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .errors import BadEnvelopeParams, NetfrakError
from .geometry import LinearNetwork, PointPattern
from .intensity import ConstantIntensity, IntensitySurface
from .settings import worker_count
from .simulate import SeededRng, poisson_inhomogeneous
from .summaries import (
    SummaryConfig,
    SummaryContext,
    SummaryEstimate,
    compute_summary,
    fit_surface,
    poisson_reference,
    prepare_context,
)

logger = logging.getLogger(__name__)

NSIM = 99
RANK = 1


@dataclass
class EnvelopeResult:
    """
    Observed curve with its pointwise simulation envelope.

    Attributes:
        r: Distance grid.
        observed: Estimate for the observed pattern.
        lo, hi: rank-th smallest / largest defined simulated value per r.
        mean: Mean of the defined simulated values per r.
        defined_count: Number of defined simulated values per r.
        simulations: (nsim, len(r)) simulated curves, NaN where undefined.
    """

    r: np.ndarray
    observed: SummaryEstimate
    lo: np.ndarray
    hi: np.ndarray
    mean: np.ndarray
    defined_count: np.ndarray
    simulations: np.ndarray
    nsim: int
    rank: int
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def obs(self) -> np.ndarray:
        return np.where(self.observed.defined, self.observed.values, np.nan)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "r": self.r,
                "obs": self.obs,
                "lo": self.lo,
                "hi": self.hi,
                "mean": self.mean,
                "defined_count": self.defined_count.astype(np.int64),
            }
        )

    def reference(self) -> np.ndarray:
        """Poisson reference curve for the statistic."""
        stat = self.observed.name.lower()
        meta = self.observed.metadata
        if stat in ("f", "h"):
            if meta.get("mode") == "inhom" and "rho_bar" in meta:
                rho = float(meta["rho_bar"])
            else:
                rho = meta["n"] / meta["total_length"]
            return poisson_reference(stat, self.r, rho)
        return poisson_reference(stat, self.r)


def pointwise_bounds(
    curves: np.ndarray, rank: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Order-statistic envelopes of simulated curves, ignoring NaN.

    Returns:
        (lo, hi, mean, defined_count); lo/hi are NaN where fewer than ``rank``
        values are defined, mean is NaN where none are.
    """
    curves = np.atleast_2d(np.asarray(curves, dtype=float))
    counts = np.count_nonzero(~np.isnan(curves), axis=0)
    ordered = np.sort(curves, axis=0)  # NaN sorts last
    cols = np.arange(curves.shape[1])
    ok = counts >= rank
    lo = np.full(curves.shape[1], np.nan)
    hi = np.full(curves.shape[1], np.nan)
    lo[ok] = ordered[rank - 1, cols[ok]]
    hi[ok] = ordered[counts[ok] - rank, cols[ok]]
    mean = np.full(curves.shape[1], np.nan)
    some = counts > 0
    mean[some] = np.nansum(curves[:, some], axis=0) / counts[some]
    return lo, hi, mean, counts


def pointwise_envelope(
    net: LinearNetwork,
    observed: PointPattern,
    config: SummaryConfig,
    nsim: int = NSIM,
    rank: int = RANK,
    refit: bool = True,
    seed: int = 0,
    ctx: Optional[SummaryContext] = None,
    surface: Optional[IntensitySurface] = None,
    workers: Optional[int] = None,
    progress: Optional[Callable[[str], None]] = None,
) -> EnvelopeResult:
    """
    Envelopes for ``config.stat`` from ``nsim`` inhomogeneous Poisson patterns
    simulated from the intensity fitted to ``observed``.

    Each simulated curve re-estimates its intensity when ``refit`` is True and
    reuses the observed fit otherwise. A replicate whose estimate fails is
    kept as an undefined curve and its error recorded in the metadata.

    Raises:
        BadEnvelopeParams: nsim < 2 * rank - 1, rank < 1 or an empty pattern.
    """
    if rank < 1 or nsim < 1 or nsim < 2 * rank - 1:
        raise BadEnvelopeParams(f"need rank >= 1 and nsim >= 2*rank - 1, got {nsim=}, {rank=}")
    if len(observed) == 0:
        raise BadEnvelopeParams("observed pattern is empty")
    progress = progress or (lambda msg: None)
    ctx = ctx or prepare_context(net, config)
    fallback = False
    if surface is None:
        surface, fallback = _fit_null(observed, config)
        if fallback:
            logger.warning(
                "observed pattern has %d point(s); simulating from the constant intensity n/|L|",
                len(observed),
            )
    bound = surface.upper_bound()
    obs = compute_summary(ctx, observed, config, surface=surface, workers=workers)
    rng = SeededRng(seed)
    curves = np.full((nsim, ctx.r.size), np.nan)
    errors: List[str] = [""] * nsim

    def one(i: int) -> None:
        try:
            sim = poisson_inhomogeneous(net, surface, bound, rng.generator(i))
            if not refit:
                sim_surface: Optional[IntensitySurface] = surface
            elif config.mode == "inhom":
                sim_surface = _fit_null(sim, config)[0]
            else:
                sim_surface = None
            est = compute_summary(ctx, sim, config, surface=sim_surface, workers=1)
            curves[i] = np.where(est.defined, est.values, np.nan)
        except NetfrakError as e:
            errors[i] = f"{i}: {e}"

    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        for done, _ in enumerate(pool.map(one, range(nsim)), start=1):
            progress(f"envelope: {done}/{nsim} simulations")

    failed = [msg for msg in errors if msg]
    if failed:
        logger.warning(
            "%d of %d envelope replicates failed; first: %s", len(failed), nsim, failed[0]
        )
    lo, hi, mean, counts = pointwise_bounds(curves, rank)
    meta = {
        "stat": obs.name,
        "null_model": "inhomogeneous poisson from kernel estimate",
        "seed": int(seed),
        "mode": config.mode,
        "refit": bool(refit),
        "surface_fallback": fallback,
        "rho_max": bound,
        "replicate_errors": failed,
        **surface.describe(),
    }
    return EnvelopeResult(ctx.r, obs, lo, hi, mean, counts, curves, nsim, rank, meta)


def _fit_null(pattern: PointPattern, config: SummaryConfig) -> Tuple[IntensitySurface, bool]:
    """
    Kernel fit for ``pattern``; patterns too small for Scott's rule get the
    constant n/|L| instead. Returns the surface and whether it is the fallback.
    """
    if config.bandwidth == "scott" and len(pattern) < 2:
        return ConstantIntensity.from_pattern(pattern), True
    return fit_surface(pattern, config), False


def longest_run(mask: np.ndarray) -> Tuple[int, int]:
    """
    Longest stretch of consecutive True values.

    Returns:
        (start, stop) indices with mask[start:stop] all True; (0, 0) if none.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return 0, 0
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    k = int(np.argmax(stops - starts))
    return int(starts[k]), int(stops[k])


@dataclass
class EnvelopeReport:
    frame: pd.DataFrame
    frac_below: float
    frac_above: float
    band_below: Optional[Tuple[float, float]]
    band_above: Optional[Tuple[float, float]]

    @property
    def verdict(self) -> str:
        def band(b: Optional[Tuple[float, float]]) -> str:
            return "none" if b is None else f"[{b[0]:.6g}, {b[1]:.6g}]"

        return (
            f"below envelope at {self.frac_below:.1%} of r (clustering signal, longest band "
            f"{band(self.band_below)}); above envelope at {self.frac_above:.1%} of r "
            f"(inhibition signal, longest band {band(self.band_above)})"
        )


def envelope_report(result: EnvelopeResult) -> EnvelopeReport:
    """Per-r table plus the fractions of r where the observed curve leaves the band."""
    obs = result.obs
    comparable = ~(np.isnan(obs) | np.isnan(result.lo) | np.isnan(result.hi))
    below = comparable & (np.where(comparable, obs, 0.0) < np.where(comparable, result.lo, 0.0))
    above = comparable & (np.where(comparable, obs, 0.0) > np.where(comparable, result.hi, 0.0))
    n = int(comparable.sum())

    def band(mask: np.ndarray) -> Optional[Tuple[float, float]]:
        start, stop = longest_run(mask)
        if stop == start:
            return None
        return float(result.r[start]), float(result.r[stop - 1])

    return EnvelopeReport(
        frame=result.to_frame(),
        frac_below=float(below.sum()) / n if n else 0.0,
        frac_above=float(above.sum()) / n if n else 0.0,
        band_below=band(below),
        band_above=band(above),
    )
