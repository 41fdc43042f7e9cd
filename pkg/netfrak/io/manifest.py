"""Run manifests: what was run, on which inputs, with which parameters."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

PathLike = Union[str, Path]


def file_digest(path: PathLike) -> str:
    """SHA-256 of a file's bytes."""
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and paths to JSON-friendly values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


@dataclass
class RunManifest:
    """
    Everything needed to reproduce one command's outputs.

    Attributes:
        subcommand: CLI subcommand name.
        argv: Full argument vector after the program name.
        params: Resolved parameters, including configuration defaults.
        seed: Master seed, if the command is random.
        inputs: Input file path -> SHA-256 digest.
        outputs: Files written by the run.
        version: netfrak version.
        duration_s: Wall-clock seconds.
        diagnostics: Run-time counters that do not affect the outputs, such as
            distance-cache hits and misses.
    """

    subcommand: str
    argv: List[str]
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    version: str = ""
    duration_s: float = 0.0
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def add_input(self, path: PathLike) -> None:
        self.inputs[str(path)] = file_digest(path)

    def to_json(self) -> str:
        return json.dumps(_plain(asdict(self)), indent=2, sort_keys=True) + "\n"

    def write(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        return path


def manifest_path_for(output: PathLike) -> Path:
    """``<out>.manifest.json`` next to a single-file output."""
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")
