"""``netfrak envelope``: pointwise Monte-Carlo envelope and verdict."""

from __future__ import annotations

import argparse
from dataclasses import asdict
from pathlib import Path

from ..envelope import envelope_report, pointwise_envelope
from ..errors import BadEnvelopeParams
from ..io import manifest_path_for, write_frame, write_svg
from ..summaries import prepare_context
from .common import (
    Run,
    add_net_argument,
    add_pattern_arguments,
    bool_type,
    positive_int,
    progress,
    seed_type,
)
from .summary import add_summary_arguments, config_from_args

NAME = "envelope"


def add_parser(subparsers, parent: argparse.ArgumentParser) -> None:
    p = subparsers.add_parser(NAME, parents=[parent], help="Monte-Carlo envelope test")
    add_net_argument(p)
    add_pattern_arguments(p)
    add_summary_arguments(p, default_stat="j")
    p.add_argument("--nsim", type=positive_int, help="simulations (default from config)")
    p.add_argument("--rank", type=positive_int, help="order statistic (default from config)")
    p.add_argument("--refit", type=bool_type, metavar="true|false", help="refit per simulation")
    p.add_argument("--seed", type=seed_type, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--svg", type=Path, help="also plot the envelope")
    p.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    job = Run(NAME, args)
    defaults = job.settings["envelope"]
    nsim = args.nsim if args.nsim is not None else int(defaults["nsim"])
    rank = args.rank if args.rank is not None else int(defaults["rank"])
    refit = args.refit if args.refit is not None else bool(defaults["refit"])
    if nsim < 2 * rank - 1:
        raise BadEnvelopeParams(f"--nsim {nsim} is too small for --rank {rank}")

    net = job.network(args.net)
    pattern = job.pattern(args.pattern, net, args.tol)
    config = config_from_args(args, job.settings)
    ctx = prepare_context(net, config)
    result = pointwise_envelope(
        net,
        pattern,
        config,
        nsim=nsim,
        rank=rank,
        refit=refit,
        seed=args.seed,
        ctx=ctx,
        progress=progress,
    )
    report = envelope_report(result)
    job.record_cache(ctx.metric)
    write_frame(report.frame, job.output(args.out))
    if args.svg:
        write_svg(
            job.output(args.svg),
            result.r,
            result.obs,
            result.observed.name,
            reference=result.reference(),
            band=(result.lo, result.hi),
        )
    job.finish(
        manifest_path_for(args.out),
        {
            **asdict(config),
            "tol": args.tol,
            "nsim": nsim,
            "rank": rank,
            "frac_below": report.frac_below,
            "frac_above": report.frac_above,
            **result.metadata,
        },
        seed=args.seed,
    )
    print(report.verdict)
    return 0
