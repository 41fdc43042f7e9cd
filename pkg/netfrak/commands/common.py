"""Argument types and input/output helpers shared by the subcommands."""

from __future__ import annotations

import argparse
import logging
import math
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from .. import __version__
from ..errors import UserError
from ..geometry import LinearNetwork, PointPattern
from ..io import RunManifest, read_network_csv, read_pattern_csv
from ..metric import ShortestPathMetric
from ..settings import load_settings

log = logging.getLogger("netfrak.cli")


def progress(msg: str) -> None:
    log.info(msg)


# ----------------------------------------------------------------------
# argparse types
# ----------------------------------------------------------------------


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def seed_type(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2^64), got {text!r}")
    return value


def bandwidth_type(text: str) -> Union[str, float]:
    if text.lower() == "scott":
        return "scott"
    return positive_float(text)


def bool_type(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def xy_type(text: str) -> Tuple[float, float]:
    parts = text.split(",")
    try:
        x, y = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y coordinates, got {text!r}")
    if not (math.isfinite(x) and math.isfinite(y)):
        raise argparse.ArgumentTypeError(f"coordinates must be finite, got {text!r}")
    return x, y


def key_value(text: str) -> Tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {key} needs a numeric value, got {value!r}")


def common_parser() -> argparse.ArgumentParser:
    """Flags every subcommand accepts."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="YAML file overriding packaged defaults")
    parent.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parent


def add_net_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--net", type=Path, required=True, help="network CSV (x1,y1,x2,y2)")


def add_pattern_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pattern", type=Path, required=True, help="pattern CSV (x,y)")
    parser.add_argument(
        "--tol",
        type=positive_float,
        help="snap tolerance (default 1e-6 times the network diameter)",
    )


# ----------------------------------------------------------------------
# Run bookkeeping
# ----------------------------------------------------------------------


class Run:
    """
    Settings, inputs and manifest for one command invocation.

    Inputs loaded through a Run have their digests recorded; ``finish``
    stamps version and duration and writes the manifest.
    """

    def __init__(self, name: str, args: argparse.Namespace) -> None:
        self.name = name
        self.args = args
        self.settings: Dict[str, Any] = load_settings(getattr(args, "config", None))
        self.manifest = RunManifest(
            subcommand=name, argv=list(getattr(args, "argv", [])), version=__version__
        )
        if getattr(args, "config", None):
            self.manifest.add_input(args.config)
        self._started = time.perf_counter()

    def network(self, path: Path) -> LinearNetwork:
        net = read_network_csv(path)
        self.manifest.add_input(path)
        log.info("network %s: %s", path, net.describe())
        return net

    def pattern(self, path: Path, net: LinearNetwork, tol: Optional[float]) -> PointPattern:
        if tol is None:
            tol = float(self.settings["geometry"]["snap_tol_frac"]) * net.diameter
        pattern = read_pattern_csv(path, net, tol)
        self.manifest.add_input(path)
        log.info("pattern %s: %d points", path, len(pattern))
        return pattern

    def output(self, path: Path) -> Path:
        self.manifest.outputs.append(str(path))
        return path

    def record_cache(self, metric: ShortestPathMetric) -> None:
        stats = metric.cache.get_cache_stats()
        self.manifest.diagnostics["distance_cache"] = stats
        log.info(
            "distance cache: %d rows, %d hits, %d misses",
            stats["total"],
            stats["hits"],
            stats["misses"],
        )

    def finish(
        self, manifest_path: Path, params: Dict[str, Any], seed: Optional[int] = None
    ) -> None:
        self.manifest.params = params
        self.manifest.seed = seed
        self.manifest.duration_s = round(time.perf_counter() - self._started, 6)
        self.manifest.write(manifest_path)
        log.info("manifest written to %s", manifest_path)


def parse_params(pairs: Optional[List[Tuple[str, float]]]) -> Dict[str, float]:
    params: Dict[str, float] = {}
    for key, value in pairs or []:
        if key in params:
            raise UserError(f"parameter {key} given more than once")
        params[key] = value
    return params
