"""One module per subcommand; each exposes ``add_parser`` and ``run``."""

from . import distance, envelope, intensity, simulate, summary, validate

SUBCOMMANDS = (validate, distance, simulate, intensity, summary, envelope)

__all__ = ["SUBCOMMANDS"]
