"""
Tests for CSV readers/writers, run manifests and SVG plots.
"""

import json

import numpy as np
import pandas as pd
import pytest

from netfrak.errors import AllUndefined, InputFormatError
from netfrak.geometry import PointPattern
from netfrak.io import (
    RunManifest,
    file_digest,
    manifest_path_for,
    pattern_frame,
    read_network_csv,
    read_pattern_csv,
    write_frame,
    write_pattern_csv,
    write_svg,
)

from conftest import write_network


class TestNetworkCsv:
    """Network files: vertex deduplication and error messages."""

    def test_nearby_endpoints_merge(self, tmp_path):
        path = tmp_path / "net.csv"
        path.write_text("x1,y1,x2,y2\n0,0,1,0\n1.0000000000001,0,1,1\n")
        net = read_network_csv(path)
        assert net.n_segments == 2
        assert net.n_vertices == 3
        np.testing.assert_array_equal(net.vertices[1], [1.0, 0.0])

    def test_round_trip(self, tmp_path, square):
        path = tmp_path / "square.csv"
        write_network(square, path)
        again = read_network_csv(path)
        assert again.n_segments == square.n_segments
        assert again.total_length == pytest.approx(square.total_length, rel=1e-15)

    def test_missing_column(self, tmp_path):
        path = tmp_path / "net.csv"
        path.write_text("x1,y1,x2\n0,0,1\n")
        with pytest.raises(InputFormatError, match="y2"):
            read_network_csv(path)

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "net.csv"
        path.write_text("x1,y1,x2,y2\n0,0,1,0\n1,0,one,1\n")
        with pytest.raises(InputFormatError, match="row 2"):
            read_network_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFormatError, match="not found"):
            read_network_csv(tmp_path / "absent.csv")


class TestPatternCsv:
    def test_snapped_from_xy(self, tmp_path, star):
        path = tmp_path / "pts.csv"
        path.write_text("x,y\n0.5,0\n0,0.25\n")
        pattern = read_pattern_csv(path, star)
        assert len(pattern) == 2
        np.testing.assert_allclose(pattern.xy, [[0.5, 0.0], [0.0, 0.25]], atol=1e-15)

    def test_segment_offset_columns_are_exact(self, tmp_path, star):
        pattern = PointPattern(star, [0, 2], [1.0 / 3.0, 0.7])
        path = tmp_path / "pts.csv"
        write_pattern_csv(pattern, path)
        again = read_pattern_csv(path, star)
        np.testing.assert_array_equal(again.segments, pattern.segments)
        np.testing.assert_array_equal(again.offsets, pattern.offsets)
        assert list(pd.read_csv(path).columns) == ["x", "y", "segment", "offset"]

    def test_every_float_reads_back_exactly(self, tmp_path, big_star):
        """Test that 17-digit offsets survive a write and a re-read bit for bit."""
        rng = np.random.default_rng(4)
        offsets = np.sort(rng.uniform(0.0, 100.0, size=200))
        pattern = PointPattern(big_star, np.zeros(200, dtype=np.int64), offsets)
        frame = pattern_frame(pattern)
        path = tmp_path / "many.csv"
        write_frame(frame, path)
        again = read_pattern_csv(path, big_star)
        np.testing.assert_array_equal(again.offsets, pattern.offsets)


class TestWriteFrame:
    def test_format(self, tmp_path):
        path = tmp_path / "out" / "curve.csv"
        write_frame(pd.DataFrame({"r": [0.0, 0.1], "value": [np.nan, 1.0 / 3.0]}), path)
        assert path.read_bytes() == b"r,value\n0,\n0.10000000000000001,0.33333333333333331\n"
        back = pd.read_csv(path, float_precision="round_trip")
        assert np.isnan(back["value"][0])
        assert back["value"][1] == 1.0 / 3.0


class TestManifest:
    def test_write_and_read(self, tmp_path):
        data = tmp_path / "net.csv"
        data.write_text("x1,y1,x2,y2\n0,0,1,0\n")
        manifest = RunManifest(subcommand="validate", argv=["validate", "--net", str(data)])
        manifest.add_input(data)
        manifest.params = {"nr": np.int64(3), "r": np.array([0.0, 0.5]), "bad": float("nan")}
        path = manifest.write(manifest_path_for(tmp_path / "curve.csv"))
        assert path.name == "curve.csv.manifest.json"
        raw = json.loads(path.read_text())
        assert raw["params"] == {"bad": None, "nr": 3, "r": [0.0, 0.5]}
        assert raw["inputs"][str(data)] == file_digest(data)
        assert raw["diagnostics"] == {}
        assert RunManifest(**raw).to_json() == path.read_text()


class TestSvg:
    """SVG figures carry identifiable layers and are reproducible."""

    def _draw(self, path):
        r = np.linspace(0.0, 1.0, 11)
        est = np.where(r < 0.15, np.nan, 1.0 + 0.1 * r)
        return write_svg(path, r, est, "J", reference=np.ones(11), band=(est - 0.2, est + 0.2))

    def test_layers(self, tmp_path):
        text = self._draw(tmp_path / "j.svg").read_text()
        for gid in ("envelope", "estimate", "reference"):
            assert f'id="{gid}"' in text

    def test_byte_identical(self, tmp_path):
        first = self._draw(tmp_path / "a.svg").read_bytes()
        second = self._draw(tmp_path / "b.svg").read_bytes()
        assert first == second

    def test_all_undefined(self, tmp_path):
        with pytest.raises(AllUndefined):
            write_svg(tmp_path / "x.svg", np.linspace(0, 1, 3), np.full(3, np.nan), "F")


def test_write_network_helper(tmp_path, seg1):
    write_network(seg1, tmp_path / "seg.csv")
    assert read_network_csv(tmp_path / "seg.csv").total_length == pytest.approx(1.0)
