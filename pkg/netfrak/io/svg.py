"""
Curve plots as standalone SVG.

Figures are drawn on an 800 x 600 point canvas: an optional grey envelope band
(gid ``envelope``), the estimate as a solid line (gid ``estimate``) and an
optional dashed reference (gid ``reference``). The output contains no date and
uses a fixed hash salt, so identical inputs give identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Tuple, Union

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from ..errors import AllUndefined

PathLike = Union[str, Path]

WIDTH_PT = 800
HEIGHT_PT = 600
DPI = 72

_RC = {
    "svg.hashsalt": "netfrak",
    "svg.fonttype": "none",
    "path.simplify": False,
}


def write_svg(
    path: PathLike,
    r: np.ndarray,
    estimate: np.ndarray,
    stat_name: str,
    reference: Optional[np.ndarray] = None,
    band: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    title: Optional[str] = None,
) -> Path:
    """
    Plot one summary curve.

    Args:
        path: Output file.
        r: Distance grid.
        estimate: Curve values; NaN values are left as gaps.
        stat_name: Y axis label, e.g. "J".
        reference: Optional dashed reference curve.
        band: Optional (lo, hi) envelope.
        title: Optional plot title.

    Raises:
        AllUndefined: no finite value to draw.
    """
    r = np.asarray(r, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    finite = np.isfinite(estimate)
    if band is not None:
        lo = np.asarray(band[0], dtype=float)
        hi = np.asarray(band[1], dtype=float)
        band_ok = np.isfinite(lo) & np.isfinite(hi)
    else:
        band_ok = np.zeros(r.size, dtype=bool)
    if r.size == 0 or not (finite.any() or band_ok.any()):
        raise AllUndefined(f"{stat_name}: no defined values to plot")

    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(WIDTH_PT / DPI, HEIGHT_PT / DPI), dpi=DPI)
        ax = fig.add_subplot(1, 1, 1)
        if band is not None:
            poly = ax.fill_between(
                r,
                np.where(band_ok, lo, 0.0),
                np.where(band_ok, hi, 0.0),
                where=band_ok,
                color="0.8",
                linewidth=0,
                label="envelope",
            )
            poly.set_gid("envelope")
        (line,) = ax.plot(
            r, estimate, color="black", linestyle="-", linewidth=1.2, label="estimate"
        )
        line.set_gid("estimate")
        if reference is not None:
            (ref,) = ax.plot(
                r,
                np.asarray(reference, dtype=float),
                color="black",
                linestyle="--",
                linewidth=1.0,
                label="Poisson",
            )
            ref.set_gid("reference")
        ax.set_xlabel("r")
        ax.set_ylabel(stat_name)
        if title:
            ax.set_title(title)
        ax.set_xlim(float(r[0]), float(r[-1]) if r[-1] > r[0] else float(r[0]) + 1.0)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path
