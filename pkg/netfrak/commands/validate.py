"""``netfrak validate``: load a network and describe it."""

from __future__ import annotations

import argparse

from .common import Run, add_net_argument

NAME = "validate"


def add_parser(subparsers, parent: argparse.ArgumentParser) -> None:
    p = subparsers.add_parser(NAME, parents=[parent], help="check a network CSV")
    add_net_argument(p)
    p.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    net = Run(NAME, args).network(args.net)
    print(net.describe())
    return 0
