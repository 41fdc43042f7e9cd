"""
Point process simulation on linear networks.

Every sampler takes a numpy Generator. Batches draw one Generator per
replicate from a SeededRng, so a replicate depends only on (seed, index) and
never on how many threads produced the batch.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from .errors import (
    BadDominating,
    BadModelParams,
    CovarianceNotPD,
    FieldTooLarge,
)
from .geometry import LinearNetwork, PointPattern, quadrature_cells
from .intensity import FunctionIntensity, IntensitySurface
from .metric import RegularMetric, metric_for
from .settings import worker_count

logger = logging.getLogger(__name__)

SSI_ATTEMPTS_PER_POINT = 10_000
LGCP_MAX_CELLS = 20_000
LGCP_JITTER_START = 1e-8
LGCP_JITTER_STOP = 1e-4

# Proposals drawn per block in SSI.
_SSI_BLOCK = 1024

Sampler = Callable[[np.random.Generator], PointPattern]


class SeededRng:
    """
    Master seed plus derivation path.

    ``generator(i)`` returns an independent stream for replicate i; the same
    (seed, path) always yields the same stream.
    """

    def __init__(self, seed: int) -> None:
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise BadModelParams(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed

    def generator(self, *path: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=tuple(path)))

    def __repr__(self) -> str:
        return f"SeededRng({self.seed})"


# ----------------------------------------------------------------------
# Poisson processes
# ----------------------------------------------------------------------


def _uniform_locations(
    net: LinearNetwork, count: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """``count`` independent uniform locations w.r.t. arc length."""
    cum = np.cumsum(net.lengths)
    s = rng.uniform(0.0, net.total_length, size=count)
    segs = np.minimum(np.searchsorted(cum, s, side="right"), net.n_segments - 1)
    starts = cum[segs] - net.lengths[segs]
    offs = np.clip(s - starts, 0.0, net.lengths[segs])
    return segs.astype(np.int64), offs


def poisson_homogeneous(
    net: LinearNetwork, rho: float, rng: np.random.Generator
) -> PointPattern:
    """Homogeneous Poisson process: N ~ Poisson(rho |L|), uniform placement."""
    if not (math.isfinite(rho) and rho >= 0.0):
        raise BadModelParams(f"intensity must be finite and >= 0, got {rho!r}")
    count = int(rng.poisson(rho * net.total_length))
    segs, offs = _uniform_locations(net, count, rng)
    return PointPattern(net, segs, offs, metadata={"model": "poisson", "rho": float(rho)})


IntensityLike = Union[IntensitySurface, Callable[[PointPattern], np.ndarray]]


def _evaluate(intensity: IntensityLike, pattern: PointPattern) -> np.ndarray:
    if isinstance(intensity, IntensitySurface):
        return intensity.evaluate(pattern)
    return np.asarray(intensity(pattern), dtype=float).reshape(len(pattern))


def poisson_inhomogeneous(
    net: LinearNetwork,
    intensity: IntensityLike,
    rho_max: float,
    rng: np.random.Generator,
) -> PointPattern:
    """
    Inhomogeneous Poisson process by thinning a dominating homogeneous one.

    Raises:
        BadDominating: the intensity exceeds ``rho_max`` at a proposed point.
    """
    if not (math.isfinite(rho_max) and rho_max >= 0.0):
        raise BadDominating(f"dominating intensity must be finite and >= 0, got {rho_max!r}")
    base = poisson_homogeneous(net, rho_max, rng)
    keep_u = rng.uniform(size=len(base))
    if len(base) == 0:
        return base.with_metadata(model="ipoisson", rho_max=float(rho_max))
    rho = _evaluate(intensity, base)
    over = np.flatnonzero(rho > rho_max * (1.0 + 1e-12))
    if over.size:
        k = int(over[0])
        raise BadDominating(
            f"intensity {rho[k]:.6g} exceeds the dominating bound {rho_max:.6g} "
            f"at segment {int(base.segments[k])}, offset {base.offsets[k]:.6g}"
        )
    kept = base.subset(keep_u * rho_max < rho)
    kept.metadata = {"model": "ipoisson", "rho_max": float(rho_max)}
    return kept


def sinusoidal_intensity(net: LinearNetwork, amp: float, freq: float = 1.0) -> FunctionIntensity:
    """rho(x, y) = amp * |sin(freq * x)|, dominated by amp."""
    if not (math.isfinite(amp) and amp >= 0.0) or not math.isfinite(freq):
        raise BadModelParams(f"need amp >= 0 and finite freq, got amp={amp!r}, freq={freq!r}")
    return FunctionIntensity(
        net,
        lambda x, y: amp * np.abs(np.sin(freq * x)),
        bound=amp,
        name="sinusoidal",
        params={"amp": amp, "freq": freq},
    )


# ----------------------------------------------------------------------
# Simple sequential inhibition and thinning
# ----------------------------------------------------------------------


def ssi(
    net: LinearNetwork,
    metric: Optional[RegularMetric],
    n: int,
    delta: float,
    rng: np.random.Generator,
    max_attempts: Optional[int] = None,
) -> PointPattern:
    """
    Simple sequential inhibition with shortest-path inhibition distance.

    Uniform proposals are accepted when their network distance to every
    accepted point exceeds ``delta``. Stops after ``n`` acceptances or
    ``max_attempts`` consecutive rejections; the latter returns the partial
    pattern with ``metadata["partial"] = True``.
    """
    if n < 0:
        raise BadModelParams(f"target count must be >= 0, got {n}")
    if not (math.isfinite(delta) and delta > 0.0):
        raise BadModelParams(f"inhibition distance must be positive, got {delta!r}")
    metric = metric or metric_for(net)
    if max_attempts is None:
        max_attempts = SSI_ATTEMPTS_PER_POINT * max(n, 1)
    segs: List[int] = []
    offs: List[float] = []
    xy = np.zeros((n, 2))
    rejections = 0
    attempts = 0
    while len(segs) < n and rejections < max_attempts:
        block_s, block_t = _uniform_locations(net, _SSI_BLOCK, rng)
        block_xy = net.xy(block_s, block_t)
        for s, t, p in zip(block_s.tolist(), block_t.tolist(), block_xy):
            if len(segs) >= n or rejections >= max_attempts:
                break
            attempts += 1
            k = len(segs)
            near = np.flatnonzero(np.hypot(*(xy[:k] - p).T) <= delta) if k else np.zeros(0, int)
            ok = True
            if near.size:
                proposal = PointPattern(net, [s], [t], check=False)[0]
                f = metric.field(proposal)
                d = f.evaluate(np.asarray(segs)[near], np.asarray(offs)[near])
                ok = bool(np.all(d > delta))
            if ok:
                segs.append(s)
                offs.append(t)
                xy[k] = p
                rejections = 0
            else:
                rejections += 1
    partial = len(segs) < n
    if partial:
        logger.warning(
            "SSI packed %d of %d points before %d consecutive rejections (delta=%.6g)",
            len(segs),
            n,
            max_attempts,
            delta,
        )
    return PointPattern(
        net,
        np.asarray(segs, dtype=np.int64),
        np.asarray(offs, dtype=float),
        metadata={
            "model": "ssi",
            "target": int(n),
            "delta": float(delta),
            "attempts": attempts,
            "partial": partial,
        },
    )


Retention = Union[float, Callable[[PointPattern], np.ndarray]]


def thin(pattern: PointPattern, p: Retention, rng: np.random.Generator) -> PointPattern:
    """Independent thinning with retention probability p (constant or per point)."""
    n = len(pattern)
    if callable(p):
        probs = np.asarray(p(pattern), dtype=float).reshape(n) if n else np.zeros(0)
    else:
        probs = np.full(n, float(p))
        if not 0.0 <= float(p) <= 1.0:
            raise BadModelParams(f"retention probability must lie in [0, 1], got {p!r}")
    if n and (np.any(probs < 0.0) or np.any(probs > 1.0) or not np.all(np.isfinite(probs))):
        raise BadModelParams("retention probabilities must lie in [0, 1]")
    u = rng.uniform(size=n)
    out = pattern.subset(u < probs)
    out.metadata = {**pattern.metadata, "thinned": True}
    if not callable(p):
        out.metadata["retention"] = float(p)
    return out


# ----------------------------------------------------------------------
# Log-Gaussian Cox processes
# ----------------------------------------------------------------------

FieldFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
CovarianceFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GaussianFieldSpec:
    """
    Gaussian random field for the log-intensity.

    Attributes:
        mean: mu(x, y), vectorised.
        covariance: Stationary isotropic covariance as a function of planar
            distance.
        spacing: Cell length used to discretise the network.
        params: Parameters recorded in metadata.
    """

    mean: FieldFn
    covariance: CovarianceFn
    spacing: float
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def variance(self) -> float:
        return float(np.asarray(self.covariance(np.zeros(1)))[0])


def exponential_covariance(variance: float, scale: float) -> CovarianceFn:
    """C(d) = variance * exp(-d / scale)."""
    if not (variance >= 0.0 and scale > 0.0):
        raise BadModelParams(f"need variance >= 0 and scale > 0, got {variance!r}, {scale!r}")
    return lambda d: variance * np.exp(-np.asarray(d, dtype=float) / scale)


def trend_field_spec(
    net: LinearNetwork,
    base: float,
    variance: float = 1.0,
    scale: float = 1.0,
    spacing: Optional[float] = None,
) -> GaussianFieldSpec:
    """
    Mean log(base) + (x - (x_max - x_min)) / |L| with exponential covariance.

    The network bounding box supplies x_min and x_max.
    """
    if not (math.isfinite(base) and base > 0.0):
        raise BadModelParams(f"base intensity must be positive, got {base!r}")
    x_min, _, x_max, _ = net.bbox
    offset = x_max - x_min
    total = net.total_length
    log_base = math.log(base)
    spacing = spacing or total / 2000.0
    return GaussianFieldSpec(
        mean=lambda x, y: log_base + (np.asarray(x, dtype=float) - offset) / total,
        covariance=exponential_covariance(variance, scale),
        spacing=float(spacing),
        params={"base": base, "variance": variance, "scale": scale, "spacing": float(spacing)},
    )


def _cholesky_with_jitter(
    cov: np.ndarray, c0: float, jitter_start: float, jitter_stop: float
) -> np.ndarray:
    jitter = jitter_start
    eye = np.eye(cov.shape[0])
    while jitter <= jitter_stop * (1.0 + 1e-9):
        try:
            factor = linalg.cholesky(cov + jitter * c0 * eye, lower=True, check_finite=False)
        except linalg.LinAlgError:
            jitter *= 10.0
            continue
        if jitter > jitter_start:
            logger.warning("LGCP covariance needed diagonal jitter %.1e * C(0)", jitter)
        return factor
    raise CovarianceNotPD(
        f"covariance matrix is not positive definite even with jitter {jitter_stop:g} * C(0)"
    )


def lgcp(
    net: LinearNetwork,
    spec: GaussianFieldSpec,
    rng: np.random.Generator,
    max_cells: int = LGCP_MAX_CELLS,
    jitter_start: float = LGCP_JITTER_START,
    jitter_stop: float = LGCP_JITTER_STOP,
) -> Tuple[PointPattern, np.ndarray]:
    """
    Log-Gaussian Cox process on network cells.

    Z is sampled at cell midpoints; each cell then receives
    Poisson(exp(Z) * cell length) points placed uniformly inside it.

    Returns:
        (pattern, Z per cell).

    Raises:
        FieldTooLarge: more than ``max_cells`` cells.
        CovarianceNotPD: jitter escalation failed.
    """
    mids, lengths = quadrature_cells(net, spec.spacing)
    m = len(mids)
    if m > max_cells:
        raise FieldTooLarge(
            f"{m} cells exceed the dense-factorisation limit of {max_cells}; increase spacing"
        )
    xy = mids.xy
    mu = np.broadcast_to(np.asarray(spec.mean(xy[:, 0], xy[:, 1]), dtype=float), (m,))
    c0 = spec.variance
    if c0 == 0.0:
        z = mu.copy()
    else:
        cov = spec.covariance(cdist(xy, xy))
        factor = _cholesky_with_jitter(cov, c0, jitter_start, jitter_stop)
        z = mu + factor @ rng.standard_normal(m)
    counts = rng.poisson(np.exp(z) * lengths)
    cells = np.repeat(np.arange(m), counts)
    u = rng.uniform(size=cells.size)
    offs = mids.offsets[cells] - 0.5 * lengths[cells] + u * lengths[cells]
    pattern = PointPattern(
        net,
        mids.segments[cells],
        offs,
        metadata={"model": "lgcp", **spec.params},
    )
    return pattern, z


# ----------------------------------------------------------------------
# Models and batches
# ----------------------------------------------------------------------


@dataclass
class SimulationModel:
    """A named sampler with its resolved parameters."""

    name: str
    params: Dict[str, Any]
    sample: Sampler

    def __call__(self, rng: np.random.Generator) -> PointPattern:
        return self.sample(rng)


_MODEL_KEYS = {
    "poisson": {"rho"},
    "ipoisson": {"amp", "freq"},
    "ssi-thin": {"n", "delta", "delta_frac", "p"},
    "lgcp": {"base", "variance", "scale", "spacing"},
}


def make_model(
    net: LinearNetwork,
    name: str,
    params: Dict[str, float],
    settings: Optional[Dict[str, Any]] = None,
    metric: Optional[RegularMetric] = None,
) -> SimulationModel:
    """
    Build one of the named models from key=value parameters.

    poisson: rho. ipoisson: amp, freq. ssi-thin: n, delta or delta_frac, p.
    lgcp: base, variance, scale, spacing.
    """
    if name not in _MODEL_KEYS:
        raise BadModelParams(f"unknown model {name!r}; choose from {sorted(_MODEL_KEYS)}")
    unknown = set(params) - _MODEL_KEYS[name]
    if unknown:
        raise BadModelParams(f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
    sim = (settings or {}).get("simulate", {})

    def get(key: str, default: Any = None) -> float:
        if key in params:
            return float(params[key])
        if default is None:
            raise BadModelParams(f"model {name} needs parameter {key}")
        return float(default)

    if name == "poisson":
        rho = get("rho")
        return SimulationModel(name, {"rho": rho}, lambda g: poisson_homogeneous(net, rho, g))

    if name == "ipoisson":
        surface = sinusoidal_intensity(net, get("amp", 0.005), get("freq", 1.0))
        bound = surface.upper_bound()
        return SimulationModel(
            name,
            dict(surface.params),
            lambda g: poisson_inhomogeneous(net, surface, bound, g),
        )

    if name == "ssi-thin":
        n = int(get("n", sim.get("ssi_n", 300)))
        if "delta" in params:
            delta = get("delta")
        else:
            delta = get("delta_frac", sim.get("ssi_delta_frac", 0.001)) * net.total_length
        p = get("p", sim.get("thin_p", 0.3))
        per_point = int(sim.get("ssi_attempts_per_point", SSI_ATTEMPTS_PER_POINT))
        metric = metric or metric_for(net)

        def sample(g: np.random.Generator) -> PointPattern:
            packed = ssi(net, metric, n, delta, g, max_attempts=per_point * max(n, 1))
            out = thin(packed, p, g)
            out.metadata.update({"model": "ssi-thin", "p": p})
            return out

        return SimulationModel(name, {"n": n, "delta": delta, "p": p}, sample)

    spec = trend_field_spec(
        net,
        get("base", sim.get("lgcp_base", 0.002)),
        get("variance", sim.get("lgcp_variance", 1.0)),
        get("scale", sim.get("lgcp_scale", 1.0)),
        get("spacing", net.total_length / 2000.0),
    )
    max_cells = int(sim.get("lgcp_max_cells", LGCP_MAX_CELLS))
    j0 = float(sim.get("lgcp_jitter_start", LGCP_JITTER_START))
    j1 = float(sim.get("lgcp_jitter_stop", LGCP_JITTER_STOP))
    return SimulationModel(
        name,
        dict(spec.params),
        lambda g: lgcp(net, spec, g, max_cells=max_cells, jitter_start=j0, jitter_stop=j1)[0],
    )


def simulate_batch(
    model: Sampler,
    reps: int,
    seed: int,
    workers: Optional[int] = None,
    progress: Optional[Callable[[str], None]] = None,
) -> List[PointPattern]:
    """
    ``reps`` replicates of ``model``; replicate i uses substream i of ``seed``.
    """
    if reps < 0:
        raise BadModelParams(f"replicate count must be >= 0, got {reps}")
    rng = SeededRng(seed)
    progress = progress or (lambda msg: None)

    def one(i: int) -> PointPattern:
        return model(rng.generator(i))

    out: List[PointPattern] = []
    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        for i, pattern in enumerate(pool.map(one, range(reps)), start=1):
            out.append(pattern)
            progress(f"simulated {i}/{reps}")
    return out
