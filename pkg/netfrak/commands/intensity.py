"""``netfrak intensity``: kernel intensity evaluated on a network grid."""

from __future__ import annotations

import argparse
from pathlib import Path

from ..geometry import grid_points
from ..io import manifest_path_for, pattern_frame, write_frame
from ..summaries import SummaryConfig, fit_surface
from .common import Run, add_net_argument, add_pattern_arguments, bandwidth_type, positive_float

NAME = "intensity"


def add_parser(subparsers, parent: argparse.ArgumentParser) -> None:
    p = subparsers.add_parser(NAME, parents=[parent], help="kernel intensity on a grid")
    add_net_argument(p)
    add_pattern_arguments(p)
    p.add_argument("--bandwidth", type=bandwidth_type, default="scott", help="scott or a value")
    p.add_argument("--grid-spacing", type=positive_float, help="default |L| / grid_target")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    job = Run(NAME, args)
    net = job.network(args.net)
    pattern = job.pattern(args.pattern, net, args.tol)
    config = SummaryConfig.from_settings(job.settings, bandwidth=args.bandwidth)
    surface = fit_surface(pattern, config)
    spacing = args.grid_spacing or net.total_length / config.grid_target
    grid = grid_points(net, spacing)
    frame = pattern_frame(grid)
    frame["rho_hat"] = surface.evaluate(grid)
    write_frame(frame, job.output(args.out))
    job.finish(
        manifest_path_for(args.out),
        {"grid_spacing": spacing, "tol": args.tol, **surface.describe()},
    )
    return 0
