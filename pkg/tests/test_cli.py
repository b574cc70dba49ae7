"""Command-line round trips on temp files, plus failure exit codes."""

import json

import numpy as np
import pytest

from cswv.bitstream import parse_stream
from cswv.cli import main
from cswv.metrics import psnr
from cswv.synthetic import textured_video
from cswv.video_io import read_headered_raw, read_raw_video, write_raw_video


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Raw input plus an encoded stream shared by the read-only tests."""
    root = tmp_path_factory.mktemp("cli")
    video = textured_video(16, 16, seed=8)
    raw = root / "input.yuv"
    raw.write_bytes(write_raw_video(video))
    stream = root / "clip.cswv"
    code = main([
        "encode", "--input", str(raw), "--width", "16", "--height", "16",
        "--threshold", "1.0", "--out", str(stream),
    ])
    assert code == 0
    frames = read_raw_video(raw.read_bytes(), 16, 16, 8)
    return root, frames, raw, stream


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEncodeDecode:
    def test_encode_reports_rate(self, workspace, capsys):
        root, _, raw, _ = workspace
        out_path = root / "again.cswv"
        code, out, _ = run(capsys, [
            "encode", "--input", str(raw), "--width", "16", "--height", "16",
            "--out", str(out_path),
        ])
        assert code == 0
        assert "encoded 8 frames" in out and "bpp" in out
        parse_stream(out_path.read_bytes())

    def test_frame_count_derived_from_size(self, workspace, capsys):
        root, frames, raw, _ = workspace
        # same pixels with interleaved 4:2:0 chroma planes appended per frame
        chroma = root / "input420.yuv"
        luma = write_raw_video(frames)
        stride = 16 * 16
        parts = []
        for i in range(8):
            parts.append(luma[i * stride : (i + 1) * stride])
            parts.append(bytes([128]) * (stride // 2))
        chroma.write_bytes(b"".join(parts))
        out_path = root / "from420.cswv"
        code, out, _ = run(capsys, [
            "encode", "--input", str(chroma), "--width", "16", "--height", "16",
            "--chroma", "420", "--out", str(out_path),
        ])
        assert code == 0
        assert "encoded 8 frames" in out

    def test_decode_round_trip(self, workspace, capsys):
        root, frames, _, stream = workspace
        out_path = root / "decoded.yuv"
        code, out, _ = run(capsys, [
            "decode", "--input", str(stream), "--out", str(out_path),
        ])
        assert code == 0
        assert "decoded layer EL3" in out
        decoded = read_raw_video(out_path.read_bytes(), 16, 16, 8)
        assert psnr(frames, decoded).overall > 35.0

    def test_decode_headered_base_layer(self, workspace, capsys):
        root, _, _, stream = workspace
        out_path = root / "base.raw"
        code, out, _ = run(capsys, [
            "decode", "--input", str(stream), "--layers", "BL",
            "--headered", "--out", str(out_path),
        ])
        assert code == 0
        assert "decoded layer BL" in out
        frames, width, height = read_headered_raw(out_path.read_bytes())
        assert frames.shape == (1, 2, 2)
        assert (width, height) == (2, 2)

    def test_extract_then_decode(self, workspace, capsys):
        root, _, _, stream = workspace
        trimmed = root / "el1.cswv"
        code, out, _ = run(capsys, [
            "extract", "--input", str(stream), "--layers", "EL1", "--out", str(trimmed),
        ])
        assert code == 0
        assert trimmed.stat().st_size < stream.stat().st_size
        out_path = root / "el1.yuv"
        code, out, _ = run(capsys, [
            "decode", "--input", str(trimmed), "--out", str(out_path),
        ])
        assert code == 0
        assert "decoded layer EL1" in out


class TestReports:
    def test_metrics_command(self, workspace, capsys):
        root, frames, raw, stream = workspace
        decoded_path = root / "formetrics.yuv"
        run(capsys, ["decode", "--input", str(stream), "--out", str(decoded_path)])
        code, out, _ = run(capsys, [
            "metrics", "--ref", str(raw), "--test", str(decoded_path),
            "--width", "16", "--height", "16", "--per-frame",
        ])
        assert code == 0
        assert out.count("frame ") == 8
        assert "psnr" in out

    def test_rate_command(self, workspace, capsys):
        _, _, _, stream = workspace
        code, out, _ = run(capsys, ["rate", "--input", str(stream)])
        assert code == 0
        assert f"total {stream.stat().st_size} bytes" in out
        for name in ("BL", "EL1", "EL2", "EL3"):
            assert name in out

    def test_complexity_command(self, capsys):
        code, out, _ = run(capsys, ["complexity", "--n", "1000"])
        assert code == 0
        assert "0.06" in out

    def test_curves_command(self, workspace, capsys):
        root = workspace[0]
        config = root / "exp.json"
        config.write_text(json.dumps({
            "experiment": "recovery_nmse", "n": 64, "sparsity": 4, "iterations": 10,
        }))
        out_csv = root / "curves.csv"
        code, out, _ = run(capsys, [
            "curves", "--config", str(config), "--out", str(out_csv),
        ])
        assert code == 0
        assert "wrote 40 rows" in out
        assert out_csv.read_text().count("\n") == 41  # header + rows

    def test_curves_empty_config(self, workspace, capsys):
        root = workspace[0]
        config = root / "empty.json"
        config.write_text("{}")
        out_csv = root / "empty.csv"
        code, out, _ = run(capsys, [
            "curves", "--config", str(config), "--out", str(out_csv),
        ])
        assert code == 0
        assert "wrote 0 rows" in out


class TestFailures:
    def test_missing_input_file(self, tmp_path, capsys):
        code, _, err = run(capsys, [
            "decode", "--input", str(tmp_path / "nope.cswv"),
            "--out", str(tmp_path / "x.yuv"),
        ])
        assert code == 1
        assert err.startswith("error:")

    def test_garbage_stream(self, tmp_path, capsys):
        bad = tmp_path / "bad.cswv"
        bad.write_bytes(b"not a stream at all")
        code, _, err = run(capsys, [
            "decode", "--input", str(bad), "--out", str(tmp_path / "x.yuv"),
        ])
        assert code == 1
        assert "error:" in err

    def test_truncated_raw_input(self, workspace, tmp_path, capsys):
        _, _, raw, _ = workspace
        code, _, err = run(capsys, [
            "encode", "--input", str(raw), "--width", "16", "--height", "16",
            "--frames", "9", "--out", str(tmp_path / "x.cswv"),
        ])
        assert code == 1
        assert "error:" in err

    def test_codec_rejects_odd_frame_size(self, tmp_path, capsys):
        raw = tmp_path / "odd.yuv"
        raw.write_bytes(bytes(12 * 12 * 8))
        code, _, err = run(capsys, [
            "encode", "--input", str(raw), "--width", "12", "--height", "12",
            "--out", str(tmp_path / "x.cswv"),
        ])
        assert code == 1
        assert "error:" in err

    def test_invalid_json_config(self, tmp_path, capsys):
        config = tmp_path / "broken.json"
        config.write_text("{not json")
        code, _, err = run(capsys, [
            "curves", "--config", str(config), "--out", str(tmp_path / "c.csv"),
        ])
        assert code == 1
        assert "error:" in err
