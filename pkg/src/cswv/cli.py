"""Command-line front end.

Subcommands mirror the library pipeline: ``encode`` raw luma video into a
layered stream, ``decode`` any layer back to raw frames, ``extract`` a
lower-layer stream without re-encoding, plus ``metrics``, ``rate``,
``complexity``, and ``curves`` for measurement.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bitstream import decode_stream, encode_video, extract_layers
from .errors import CodecError
from .metrics import complexity_report, emit_curves, psnr, rate_report
from .recovery import ALGORITHMS, RecoveryConfig
from .sensing import DEFAULT_MASTER_SEED, DEFAULT_TARGET_MIN_N
from .video_io import read_raw_video, write_headered_raw, write_raw_video

LAYER_CHOICES = ("auto", "BL", "EL1", "EL2", "EL3")


def _parse_seed(text: str) -> int:
    return int(text, 0)  # accepts decimal or 0x-prefixed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cswv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="compress raw 8-bit luma video")
    enc.add_argument("--input", required=True, type=Path)
    enc.add_argument("--width", required=True, type=int)
    enc.add_argument("--height", required=True, type=int)
    enc.add_argument("--frames", type=int, default=None,
                     help="frame count; derived from the file size when omitted")
    enc.add_argument("--chroma", choices=("none", "420"), default="none",
                     help="skip interleaved 4:2:0 chroma planes in the input")
    enc.add_argument("--threshold", type=float, default=1.0,
                     help="magnitude below which detail coefficients are dropped")
    enc.add_argument("--bits", type=int, default=12, help="quantizer depth (4..16)")
    enc.add_argument("--fps", type=int, default=30)
    enc.add_argument("--seed", type=_parse_seed, default=DEFAULT_MASTER_SEED,
                     help="master seed for the shared measurement matrices")
    enc.add_argument("--target-min-n", type=int, default=DEFAULT_TARGET_MIN_N)
    enc.add_argument("--out", required=True, type=Path)

    dec = sub.add_parser("decode", help="reconstruct video from a stream")
    dec.add_argument("--input", required=True, type=Path)
    dec.add_argument("--layers", choices=LAYER_CHOICES, default="auto")
    dec.add_argument("--algo", choices=ALGORITHMS, default="eamp")
    dec.add_argument("--iterations", type=int, default=400)
    dec.add_argument("--onsager-divisor", choices=("n", "m"), default="n")
    dec.add_argument("--headered", action="store_true",
                     help="prefix the output with a CSWV-RAW size header")
    dec.add_argument("--out", required=True, type=Path)

    ext = sub.add_parser("extract", help="drop layers above the requested one")
    ext.add_argument("--input", required=True, type=Path)
    ext.add_argument("--layers", choices=LAYER_CHOICES[1:], required=True)
    ext.add_argument("--out", required=True, type=Path)

    met = sub.add_parser("metrics", help="PSNR between two raw videos")
    met.add_argument("--ref", required=True, type=Path)
    met.add_argument("--test", required=True, type=Path)
    met.add_argument("--width", required=True, type=int)
    met.add_argument("--height", required=True, type=int)
    met.add_argument("--frames", type=int, default=None)
    met.add_argument("--per-frame", action="store_true")

    rate = sub.add_parser("rate", help="byte and measurement accounting for a stream")
    rate.add_argument("--input", required=True, type=Path)

    comp = sub.add_parser("complexity", help="solver operation-count comparison")
    comp.add_argument("--n", required=True, type=int)
    comp.add_argument("--m-fraction", type=float, default=0.25)
    comp.add_argument("--iterations", type=int, default=200)

    cur = sub.add_parser("curves", help="run a JSON-described experiment, write CSV")
    cur.add_argument("--config", required=True, type=Path)
    cur.add_argument("--out", required=True, type=Path)
    return parser


def _derive_frames(path: Path, width: int, height: int, chroma: str, given) -> int:
    if given is not None:
        return given
    luma = width * height
    stride = luma + (luma // 2 if chroma == "420" else 0)
    return path.stat().st_size // stride


def _cmd_encode(args) -> int:
    frames = read_raw_video(
        args.input.read_bytes(),
        args.width,
        args.height,
        _derive_frames(args.input, args.width, args.height, args.chroma, args.frames),
        chroma=args.chroma,
    )
    stream = encode_video(
        frames,
        threshold=args.threshold,
        quant_bits=args.bits,
        fps=args.fps,
        master_seed=args.seed,
        target_min_n=args.target_min_n,
    )
    args.out.write_bytes(stream)
    report = rate_report(stream)
    per_layer = " ".join(f"{k}={v}B" for k, v in report.layer_bytes.items())
    print(
        f"encoded {frames.shape[0]} frames to {len(stream)} bytes "
        f"({report.bits_per_pixel:.4f} bpp, measured "
        f"{100.0 * report.measurement_fraction:.1f}%) {per_layer}"
    )
    return 0


def _cmd_decode(args) -> int:
    config = RecoveryConfig(
        algorithm=args.algo,
        iterations=args.iterations,
        onsager_divisor=args.onsager_divisor,
    )
    decoded = decode_stream(args.input.read_bytes(), layers=args.layers, recovery=config)
    frames = decoded.frames
    h, w = frames.shape[1:]
    if args.headered:
        args.out.write_bytes(write_headered_raw(frames, w, h))
    else:
        args.out.write_bytes(write_raw_video(frames))
    print(
        f"decoded layer {decoded.layer_name}: {frames.shape[0]} frames of {w}x{h} "
        f"({decoded.frames_per_gof} per group)"
    )
    return 0


def _cmd_extract(args) -> int:
    out = extract_layers(args.input.read_bytes(), args.layers)
    args.out.write_bytes(out)
    print(f"kept layers up to {args.layers}: {len(out)} bytes")
    return 0


def _cmd_metrics(args) -> int:
    count = _derive_frames(args.ref, args.width, args.height, "none", args.frames)
    ref = read_raw_video(args.ref.read_bytes(), args.width, args.height, count)
    test = read_raw_video(args.test.read_bytes(), args.width, args.height, count)
    report = psnr(ref, test)
    if args.per_frame:
        for i, value in enumerate(report.per_frame):
            print(f"frame {i}: {value:.4f} dB")
    print(f"psnr {report.overall:.4f} dB (pooled mse {report.mse:.6g})")
    return 0


def _cmd_rate(args) -> int:
    report = rate_report(args.input.read_bytes())
    print(f"total {report.total_bytes} bytes, header {report.header_bytes} bytes")
    for name, size in report.layer_bytes.items():
        print(f"  {name}: {size} bytes")
    print(
        f"measured {report.effective_measurements} of {report.measured_samples} "
        f"samples ({100.0 * report.measurement_fraction:.2f}%), "
        f"{report.bits_per_pixel:.4f} bpp"
    )
    return 0


def _cmd_complexity(args) -> int:
    report = complexity_report(args.n, args.m_fraction, args.iterations)
    print(f"n={report.n} m={report.m:g} iterations={report.iterations}")
    print(f"conventional: {report.conventional_multiplies:.6g} mult, "
          f"{report.conventional_adds:.6g} add")
    print(f"proposed:     {report.proposed_multiplies:.6g} mult, "
          f"{report.proposed_adds:.6g} add")
    ratio = "unbounded" if report.ratio_unbounded else f"{report.ratio:.6g}"
    print(f"multiply ratio (proposed/conventional): {ratio}")
    return 0


def _cmd_curves(args) -> int:
    config = json.loads(args.config.read_text(encoding="utf-8"))
    rows = emit_curves(config, args.out)
    print(f"wrote {rows} rows to {args.out}")
    return 0


_COMMANDS = {
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "extract": _cmd_extract,
    "metrics": _cmd_metrics,
    "rate": _cmd_rate,
    "complexity": _cmd_complexity,
    "curves": _cmd_curves,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (CodecError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
