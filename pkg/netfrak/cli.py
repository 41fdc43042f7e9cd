"""
Command-line entry point.

Exit codes: 0 on success, 1 for user errors (bad files, flags or parameters)
with a single ``netfrak: error: ...`` line on stderr, 2 for internal failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, NoReturn, Optional, Sequence

from . import __version__
from .commands import SUBCOMMANDS
from .commands.common import common_parser
from .errors import InvariantViolation, UserError

logger = logging.getLogger("netfrak.cli")

EXIT_OK = 0
EXIT_USER = 1
EXIT_INTERNAL = 2


class UsageError(Exception):
    """Raised instead of exiting when argparse rejects the command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="netfrak",
        description="Point patterns on linear networks: summaries, simulation, envelopes.",
    )
    parser.add_argument("--version", action="version", version=f"netfrak {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    parent = common_parser()
    for module in SUBCOMMANDS:
        module.add_parser(subparsers, parent)
    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _fail(message: str) -> None:
    print(f"netfrak: error: {message}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv: List[str] = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        _fail(str(e))
        return EXIT_USER
    args.argv = argv
    _configure_logging(args.verbose)
    try:
        return int(args.func(args))
    except UserError as e:
        _fail(str(e))
        return EXIT_USER
    except InvariantViolation as e:
        logger.exception("internal invariant violated")
        _fail(f"internal error: {e}")
        return EXIT_INTERNAL
    except Exception as e:  # noqa: BLE001
        logger.exception("unexpected failure")
        _fail(f"internal error: {e}")
        return EXIT_INTERNAL
