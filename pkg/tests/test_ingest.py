import json

import numpy as np
import pytest

from thermoperfusion import (
    ModelVariant,
    PairingPolicy,
    RoiName,
    SetLabel,
    ThermalFrame,
    load_frame,
    load_manifest,
    load_session,
    write_frame,
)
from thermoperfusion.errors import (
    FrameFormatError,
    FrameRangeError,
    ManifestError,
    ParameterError,
    SessionError,
)


class TestFrameCsv:
    def test_basic_parse(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("24.0,24.1\n24.2,24.3\n")
        frame = load_frame(p)
        assert frame.data.shape == (2, 2)
        assert frame.data[1, 0] == 24.2

    def test_comments_and_blank_lines_skipped(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("# header\n\n30.0,31.0\n# mid comment\n32.0,33.0\n")
        frame = load_frame(p)
        assert frame.data.shape == (2, 2)

    def test_crlf_accepted(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_bytes(b"30.0,31.0\r\n32.0,33.0\r\n")
        assert load_frame(p).data.shape == (2, 2)

    def test_ragged_row_cites_line(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("24.0,24.1\n24.2\n")
        with pytest.raises(FrameFormatError, match="line 2"):
            load_frame(p)

    def test_non_numeric_cell_cites_position(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("24.0,24.1\n24.2,oops\n")
        with pytest.raises(FrameFormatError, match="line 2, column 2"):
            load_frame(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("# only a comment\n")
        with pytest.raises(FrameFormatError, match="no data rows"):
            load_frame(p)

    def test_out_of_range_value(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("24.0,24.1\n24.2,500.0\n")
        with pytest.raises(FrameRangeError):
            load_frame(p)

    def test_round_trip_preserves_six_decimals(self, tmp_path):
        rng = np.random.default_rng(0)
        data = np.round(rng.uniform(20.0, 38.0, size=(7, 9)), 6)
        frame = ThermalFrame(data=data)
        p = tmp_path / "f.csv"
        write_frame(frame, p, fmt="csv")
        back = load_frame(p)
        assert np.allclose(back.data, data, atol=5e-7)


class TestFrameBinary:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        data = rng.uniform(20.0, 38.0, size=(11, 13))
        frame = ThermalFrame(data=data)
        p = tmp_path / "f.tpf"
        write_frame(frame, p, fmt="binary")
        back = load_frame(p)
        assert np.array_equal(back.data, data)

    def test_header_layout(self, tmp_path):
        frame = ThermalFrame(data=np.full((2, 3), 30.0))
        p = tmp_path / "f.tpf"
        write_frame(frame, p, fmt="binary")
        raw = p.read_bytes()
        assert raw[:4] == b"TPF1"
        assert int.from_bytes(raw[4:8], "little") == 3   # width
        assert int.from_bytes(raw[8:12], "little") == 2  # height
        assert len(raw) == 12 + 6 * 8

    def test_truncated_payload(self, tmp_path):
        frame = ThermalFrame(data=np.full((2, 3), 30.0))
        p = tmp_path / "f.tpf"
        write_frame(frame, p, fmt="binary")
        p.write_bytes(p.read_bytes()[:-8])
        with pytest.raises(FrameFormatError, match="size"):
            load_frame(p)

    def test_unknown_format_rejected(self, tmp_path):
        frame = ThermalFrame(data=np.full((2, 2), 30.0))
        with pytest.raises(ParameterError):
            write_frame(frame, tmp_path / "f.x", fmt="npz")


def _write_set(root, name, n, value=34.0, shape=(6, 8)):
    d = root / name
    d.mkdir()
    data = np.full(shape, value)
    data[2:4, 3:5] = value + 2.0  # keep frames non-constant
    for k in range(n):
        write_frame(ThermalFrame(data=data), d / f"frame_{k:04d}.csv")
    return d


def _manifest_doc(**overrides):
    doc = {
        "subject_id": "s1",
        "environment": {"ambient_c": 24.0, "relative_humidity": 63.0},
        "sets": {"baseline": {"dir": "baseline"},
                 "negative": {"dir": "negative"},
                 "positive": {"dir": "positive"}},
        "rois": [{"name": "NOSE", "row": 2, "col": 3, "rows": 2, "cols": 2},
                 {"name": "TOTAL_FACE"}],
    }
    doc.update(overrides)
    return doc


def _write_session(tmp_path, sizes=(3, 3, 3), **overrides):
    for name, n in zip(("baseline", "negative", "positive"), sizes):
        _write_set(tmp_path, name, n)
    m = tmp_path / "manifest.json"
    m.write_text(json.dumps(_manifest_doc(**overrides)))
    return m


class TestManifest:
    def test_parse_fields(self, tmp_path):
        m = _write_session(tmp_path, model={"variant": "table",
                                            "sensitivity_threshold": 0.1},
                           pairing="truncate")
        manifest = load_manifest(m)
        assert manifest.subject_id == "s1"
        assert manifest.ambient_c == 24.0
        assert manifest.variant is ModelVariant.TABLE_CONSISTENT
        assert manifest.sensitivity_threshold == 0.1
        assert manifest.pairing is PairingPolicy.TRUNCATE
        assert manifest.roi_set.include_total_face
        assert manifest.roi_set.rect(RoiName.NOSE).row == 2

    def test_files_sorted_lexicographically(self, tmp_path):
        m = _write_session(tmp_path)
        manifest = load_manifest(m)
        names = [p.name for p in manifest.frame_files[SetLabel.BASELINE]]
        assert names == sorted(names)

    def test_missing_key(self, tmp_path):
        for name in ("baseline", "negative", "positive"):
            _write_set(tmp_path, name, 2)
        doc = _manifest_doc()
        del doc["rois"]
        m = tmp_path / "manifest.json"
        m.write_text(json.dumps(doc))
        with pytest.raises(ManifestError, match="rois"):
            load_manifest(m)

    def test_invalid_json(self, tmp_path):
        m = tmp_path / "manifest.json"
        m.write_text("{not json")
        with pytest.raises(ManifestError):
            load_manifest(m)

    def test_missing_set_directory(self, tmp_path):
        _write_set(tmp_path, "baseline", 2)
        _write_set(tmp_path, "negative", 2)
        m = tmp_path / "manifest.json"
        m.write_text(json.dumps(_manifest_doc()))
        with pytest.raises(ManifestError, match="positive"):
            load_manifest(m)

    def test_bad_roi_name(self, tmp_path):
        m = _write_session(tmp_path, rois=[{"name": "CHIN", "row": 0,
                                            "col": 0, "rows": 2, "cols": 2}])
        with pytest.raises(ManifestError, match="ROI"):
            load_manifest(m)

    def test_explicit_file_list(self, tmp_path):
        for name in ("baseline", "negative", "positive"):
            _write_set(tmp_path, name, 2)
        doc = _manifest_doc(sets={
            "baseline": ["baseline/frame_0000.csv", "baseline/frame_0001.csv"],
            "negative": {"files": ["negative/frame_0000.csv"]},
            "positive": {"dir": "positive"},
        })
        m = tmp_path / "manifest.json"
        m.write_text(json.dumps(doc))
        manifest = load_manifest(m)
        assert len(manifest.frame_files[SetLabel.BASELINE]) == 2
        assert len(manifest.frame_files[SetLabel.NEGATIVE]) == 1

    def test_missing_listed_file(self, tmp_path):
        for name in ("baseline", "negative", "positive"):
            _write_set(tmp_path, name, 2)
        doc = _manifest_doc(sets={
            "baseline": ["baseline/frame_0000.csv", "baseline/nope.csv"],
            "negative": {"dir": "negative"},
            "positive": {"dir": "positive"},
        })
        m = tmp_path / "manifest.json"
        m.write_text(json.dumps(doc))
        with pytest.raises(SessionError, match="nope.csv"):
            load_manifest(m)


class TestLoadSession:
    def test_loads_and_warns_on_nonnominal_sizes(self, tmp_path):
        m = _write_session(tmp_path, sizes=(3, 3, 3))
        session, manifest, warnings = load_session(m)
        assert len(session.baseline) == 3
        assert len(warnings) == 3
        assert any("BASELINE" in w and "60" in w for w in warnings)

    def test_mixed_dimensions_rejected(self, tmp_path):
        _write_set(tmp_path, "baseline", 2)
        _write_set(tmp_path, "negative", 2)
        _write_set(tmp_path, "positive", 2, shape=(5, 5))
        m = tmp_path / "manifest.json"
        m.write_text(json.dumps(_manifest_doc()))
        with pytest.raises(SessionError, match="dimensions"):
            load_session(m)

    def test_frames_keep_manifest_order(self, tmp_path):
        m = _write_session(tmp_path)
        session, _, _ = load_session(m)
        assert [f.timestamp_index for f in session.baseline] == [0, 1, 2]
