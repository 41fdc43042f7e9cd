"""``netfrak summary``: one F, H, J or K estimate for a pattern."""

from __future__ import annotations

import argparse
from dataclasses import asdict
from pathlib import Path

from ..io import manifest_path_for, write_frame, write_svg
from ..summaries import MODES, SummaryConfig, compute_summary, prepare_context, reference_curve
from .common import (
    Run,
    add_net_argument,
    add_pattern_arguments,
    bandwidth_type,
    positive_float,
    positive_int,
    progress,
)

NAME = "summary"
STAT_CHOICES = ("f", "g", "h", "j", "k")


def add_summary_arguments(p: argparse.ArgumentParser, default_stat: str) -> None:
    p.add_argument("--stat", choices=STAT_CHOICES, default=default_stat, type=str.lower)
    p.add_argument("--mode", choices=MODES, default="inhom")
    p.add_argument("--grid-spacing", type=positive_float, help="default |L| / grid_target")
    p.add_argument("--rmax-frac", type=positive_float, help="largest r as a fraction of R")
    p.add_argument("--nr", type=positive_int, help="number of r values")
    p.add_argument("--bandwidth", type=bandwidth_type, default="scott", help="scott or a value")


def config_from_args(args: argparse.Namespace, settings: dict) -> SummaryConfig:
    return SummaryConfig.from_settings(
        settings,
        stat=args.stat,
        mode=args.mode,
        grid_spacing=args.grid_spacing,
        rmax_frac=args.rmax_frac,
        nr=args.nr,
        bandwidth=args.bandwidth,
    )


def add_parser(subparsers, parent: argparse.ArgumentParser) -> None:
    p = subparsers.add_parser(NAME, parents=[parent], help="estimate a summary function")
    add_net_argument(p)
    add_pattern_arguments(p)
    add_summary_arguments(p, default_stat="j")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--svg", type=Path, help="also plot the curve")
    p.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    job = Run(NAME, args)
    net = job.network(args.net)
    pattern = job.pattern(args.pattern, net, args.tol)
    config = config_from_args(args, job.settings)
    ctx = prepare_context(net, config)
    est = compute_summary(ctx, pattern, config, progress=progress)
    job.record_cache(ctx.metric)
    frame = est.to_frame()
    write_frame(frame, job.output(args.out))
    if args.svg:
        write_svg(
            job.output(args.svg),
            est.r,
            frame["value"].to_numpy(),
            est.name,
            reference=reference_curve(est),
        )
    job.finish(manifest_path_for(args.out), {**asdict(config), "tol": args.tol, **est.metadata})
    return 0
