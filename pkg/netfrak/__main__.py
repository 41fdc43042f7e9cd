"""Console script entry: ``netfrak`` or ``python -m netfrak``."""

import sys
from typing import Optional, Sequence

from .cli import main as _run


def main(argv: Optional[Sequence[str]] = None) -> int:
    return _run(argv)


if __name__ == "__main__":
    sys.exit(main())
