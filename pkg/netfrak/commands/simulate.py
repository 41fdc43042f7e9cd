"""``netfrak simulate``: replicate patterns from a named model."""

from __future__ import annotations

import argparse
from pathlib import Path

from ..io import write_pattern_csv
from ..simulate import make_model, simulate_batch
from .common import Run, add_net_argument, key_value, parse_params, progress, seed_type

NAME = "simulate"
MODELS = ("poisson", "ipoisson", "ssi-thin", "lgcp")


def add_parser(subparsers, parent: argparse.ArgumentParser) -> None:
    p = subparsers.add_parser(NAME, parents=[parent], help="simulate point patterns")
    add_net_argument(p)
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument(
        "--params", type=key_value, nargs="*", default=[], metavar="KEY=VAL", help="model params"
    )
    p.add_argument("--seed", type=seed_type, required=True)
    p.add_argument("--reps", type=int, default=1, help="number of replicates (default 1)")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    job = Run(NAME, args)
    net = job.network(args.net)
    model = make_model(net, args.model, parse_params(args.params), job.settings)
    patterns = simulate_batch(model, args.reps, args.seed, progress=progress)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(args.reps)))
    flags = []
    for i, pattern in enumerate(patterns):
        path = job.output(out_dir / f"pattern_{i:0{width}d}.csv")
        write_pattern_csv(pattern, path)
        flags.append({"replicate": i, "n": len(pattern), **_flags(pattern.metadata)})
    job.finish(
        out_dir / "manifest.json",
        {"model": model.name, "model_params": model.params, "reps": args.reps, "flags": flags},
        seed=args.seed,
    )
    print(f"wrote {len(patterns)} pattern(s) to {out_dir}")
    return 0


def _flags(metadata: dict) -> dict:
    """Per-replicate flags worth recording (partial SSI packings and the like)."""
    keep = ("partial", "attempts")
    return {k: metadata[k] for k in keep if k in metadata}
