"""File formats: CSV inputs and outputs, run manifests and SVG plots."""

from .csv_io import (
    pattern_frame,
    read_network_csv,
    read_pattern_csv,
    write_frame,
    write_pattern_csv,
)
from .manifest import RunManifest, file_digest, manifest_path_for
from .svg import write_svg

__all__ = [
    "RunManifest",
    "file_digest",
    "manifest_path_for",
    "pattern_frame",
    "read_network_csv",
    "read_pattern_csv",
    "write_frame",
    "write_pattern_csv",
    "write_svg",
]
