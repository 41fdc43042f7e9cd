"""``netfrak distance``: shortest-path distance between two snapped points."""

from __future__ import annotations

import argparse

from ..geometry import snap_to_network
from ..metric import shortest_path_distance
from .common import Run, add_net_argument, positive_float, xy_type

NAME = "distance"


def add_parser(subparsers, parent: argparse.ArgumentParser) -> None:
    p = subparsers.add_parser(NAME, parents=[parent], help="geodesic distance between two points")
    add_net_argument(p)
    p.add_argument("--from", dest="origin", type=xy_type, required=True, metavar="X,Y")
    p.add_argument("--to", dest="target", type=xy_type, required=True, metavar="X,Y")
    p.add_argument("--tol", type=positive_float, help="snap tolerance")
    p.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    job = Run(NAME, args)
    net = job.network(args.net)
    tol = args.tol
    if tol is None:
        tol = float(job.settings["geometry"]["snap_tol_frac"]) * net.diameter
    u = snap_to_network(net, args.origin, tol)
    v = snap_to_network(net, args.target, tol)
    print(f"{shortest_path_distance(net, u, v):.17g}")
    return 0
