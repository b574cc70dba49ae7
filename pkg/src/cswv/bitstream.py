"""Layered stream container and the end-to-end encode/decode pipelines.

A stream is a fixed header followed by byte-aligned layer chunks:

    header:  magic "CSWV", version, geometry, coding parameters, master seed
    chunk:   gof_index u32 | layer_id u8 | payload_len u32 | payload bytes

Layer 0 (BL) carries the base band as one entropy-coded chunk.  Layers 1..3
(EL1..EL3) carry measurement records for their scalability group: entry index
in 4 bits, exact sparsity in 16 bits, then the coded measurement chunk when
the entry is nonzero.  Chunks arrive gof-major, layers ascending, so cutting
the file at any chunk boundary leaves a decodable stream; dropping all chunks
above a chosen layer (``extract_layers``) does the same without re-encoding.

Decoding at layer i keeps the first 2**i temporal planes cropped to their
top-left i-level spatial block, runs the partial synthesis, and divides out
the sqrt(2) gain of each temporal level that was never inverted.  The result
is 2**i frames per group at (W >> (3-i)) x (H >> (3-i)).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from itertools import groupby

import numpy as np

from .coding import BitReader, BitWriter, decode_chunk, encode_chunk, read_chunk, write_chunk
from .dwt import dwt3d_forward, dwt3d_inverse, dwt3d_inverse_partial
from .errors import (
    BitstreamError,
    DimensionError,
    FormatError,
    TruncatedInputError,
    UnusableStreamError,
)
from .geometry import (
    LAYER_NAMES,
    PLANE_NAMES,
    SPATIAL_LEVELS,
    SubbandPyramid,
    layer_index,
)
from .recovery import RecoveryConfig, recover_record
from .sensing import (
    DEFAULT_MASTER_SEED,
    DEFAULT_TARGET_MIN_N,
    MeasurementRecord,
    SensingCodebook,
    band_vector_counts,
    devectorize_band,
    sense_pyramid,
)
from .video_io import GOF_SIZE, partition_gofs

MAGIC = b"CSWV"
VERSION = 1

_HEADER_FMT = "<4sHIIIHBBBBfQI"
_HEADER_SIZE = struct.calcsize(_HEADER_FMT)
_CHUNK_FMT = "<IBI"
_CHUNK_OVERHEAD = struct.calcsize(_CHUNK_FMT)

MAX_SPARSITY_FIELD = 0xFFFF


@dataclass
class StreamHeader:
    """Everything a decoder needs before the first chunk."""

    width: int
    height: int
    frame_count: int
    fps: int = 30
    quant_bits: int = 12
    threshold: float = 1.0
    master_seed: int = DEFAULT_MASTER_SEED
    target_min_n: int = DEFAULT_TARGET_MIN_N
    version: int = VERSION
    gof_size: int = GOF_SIZE
    spatial_levels: int = SPATIAL_LEVELS
    temporal_levels: int = 3

    def to_bytes(self) -> bytes:
        return struct.pack(
            _HEADER_FMT,
            MAGIC,
            self.version,
            self.width,
            self.height,
            self.frame_count,
            self.fps,
            self.gof_size,
            self.spatial_levels,
            self.temporal_levels,
            self.quant_bits,
            self.threshold,
            self.master_seed,
            self.target_min_n,
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "StreamHeader":
        if len(data) < _HEADER_SIZE:
            raise TruncatedInputError(
                f"header needs {_HEADER_SIZE} bytes, got {len(data)}", byte_offset=len(data)
            )
        (magic, version, width, height, frame_count, fps, gof_size, spatial,
         temporal, quant_bits, threshold, master_seed, target_min_n) = struct.unpack(
            _HEADER_FMT, data[:_HEADER_SIZE]
        )
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise FormatError(f"unsupported stream version {version}")
        header = cls(
            width=width,
            height=height,
            frame_count=frame_count,
            fps=fps,
            quant_bits=quant_bits,
            threshold=threshold,
            master_seed=master_seed,
            target_min_n=target_min_n,
            version=version,
            gof_size=gof_size,
            spatial_levels=spatial,
            temporal_levels=temporal,
        )
        header.validate()
        return header

    def validate(self) -> None:
        if self.gof_size != GOF_SIZE or self.spatial_levels != 3 or self.temporal_levels != 3:
            raise FormatError(
                f"unsupported geometry gof={self.gof_size} "
                f"spatial={self.spatial_levels} temporal={self.temporal_levels}"
            )
        if self.width % 8 or self.height % 8 or self.width < 8 or self.height < 8:
            raise FormatError(f"frame size {self.width}x{self.height} not divisible by 8")
        if self.frame_count < 1:
            raise FormatError("stream holds no frames")
        if not 4 <= self.quant_bits <= 16:
            raise FormatError(f"quantizer depth {self.quant_bits} outside [4, 16]")
        if self.target_min_n < 2:
            raise FormatError(f"measurement target {self.target_min_n} too small")

    @property
    def gof_count(self) -> int:
        return -(-self.frame_count // self.gof_size)


@dataclass
class LayerChunk:
    gof_index: int
    layer_id: int
    payload: bytes


def write_stream(header: StreamHeader, chunks: list[LayerChunk]) -> bytes:
    parts = [header.to_bytes()]
    for chunk in chunks:
        parts.append(struct.pack(_CHUNK_FMT, chunk.gof_index, chunk.layer_id, len(chunk.payload)))
        parts.append(chunk.payload)
    return b"".join(parts)


def parse_stream(data: bytes) -> tuple[StreamHeader, list[LayerChunk]]:
    """Split a stream into header and chunks; any short read raises with its offset."""
    header = StreamHeader.from_bytes(data)
    chunks = []
    offset = _HEADER_SIZE
    while offset < len(data):
        if offset + _CHUNK_OVERHEAD > len(data):
            raise TruncatedInputError(
                f"chunk header cut short at byte {offset}", byte_offset=offset
            )
        gof_index, layer_id, length = struct.unpack_from(_CHUNK_FMT, data, offset)
        offset += _CHUNK_OVERHEAD
        if offset + length > len(data):
            raise TruncatedInputError(
                f"chunk payload of {length} bytes cut short at byte {offset}",
                byte_offset=offset,
            )
        if layer_id >= len(LAYER_NAMES):
            raise BitstreamError(f"unknown layer id {layer_id}")
        chunks.append(LayerChunk(gof_index, layer_id, bytes(data[offset : offset + length])))
        offset += length
    return header, chunks


def extract_layers(data: bytes, layers) -> bytes:
    """Drop every chunk above the requested layer; the rest passes through verbatim."""
    level = _resolve_level(layers)
    header, chunks = parse_stream(data)
    kept = [c for c in chunks if c.layer_id <= level]
    return write_stream(header, kept)


def _resolve_level(layers) -> int:
    if isinstance(layers, (int, np.integer)):
        if not 0 <= int(layers) <= 3:
            raise ValueError(f"layer index {layers} outside [0, 3]")
        return int(layers)
    return layer_index(str(layers))


def encode_video(
    frames: np.ndarray,
    *,
    threshold: float,
    quant_bits: int = 12,
    fps: int = 30,
    master_seed: int = DEFAULT_MASTER_SEED,
    target_min_n: int = DEFAULT_TARGET_MIN_N,
) -> bytes:
    """Transform, measure, and pack a grayscale video into a layered stream."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 3:
        raise DimensionError(f"expected (frames, H, W), got shape {frames.shape}")
    count, height, width = frames.shape
    if not 1 <= fps <= 0xFFFF:
        raise ValueError(f"fps {fps} outside [1, 65535]")
    header = StreamHeader(
        width=width,
        height=height,
        frame_count=count,
        fps=fps,
        quant_bits=quant_bits,
        threshold=float(threshold),
        master_seed=master_seed,
        target_min_n=target_min_n,
    )
    header.validate()
    codebook = SensingCodebook(master_seed)
    gofs, _ = partition_gofs(frames)
    chunks: list[LayerChunk] = []
    for g, gof in enumerate(gofs):
        pyramid = dwt3d_forward(gof)
        base, records = sense_pyramid(pyramid, threshold, codebook, target_min_n)

        writer = BitWriter()
        write_chunk(writer, encode_chunk(base.reshape(-1, order="F"), quant_bits))
        chunks.append(LayerChunk(g, 0, writer.getvalue()))

        for layer_id in (1, 2, 3):
            writer = BitWriter()
            for rec in records:
                if rec.band.layer != layer_id:
                    continue
                if rec.sparsity > MAX_SPARSITY_FIELD:
                    raise BitstreamError(
                        f"sparsity {rec.sparsity} exceeds the 16-bit record field"
                    )
                writer.write_bits(rec.entry, 4)
                writer.write_bits(rec.sparsity, 16)
                if rec.entry:
                    write_chunk(writer, encode_chunk(rec.y, quant_bits))
            chunks.append(LayerChunk(g, layer_id, writer.getvalue()))
    return write_stream(header, chunks)


@dataclass
class DecodedVideo:
    """Frames reconstructed at one scalability level.

    ``level`` 3 is full resolution and frame rate; level i < 3 halves the
    frame count and frame size once per missing level (level 0 is one
    (H/8 x W/8) frame per group of 8).
    """

    frames: np.ndarray
    level: int
    header: StreamHeader

    @property
    def layer_name(self) -> str:
        return LAYER_NAMES[self.level]

    @property
    def frames_per_gof(self) -> int:
        return 1 << self.level


def decode_stream(
    data: bytes,
    *,
    layers="auto",
    recovery: RecoveryConfig | None = None,
) -> DecodedVideo:
    """Reconstruct video from a stream at the requested (or deepest held) layer."""
    header, chunks = parse_stream(data)
    table: dict[tuple[int, int], bytes] = {}
    for chunk in chunks:
        key = (chunk.gof_index, chunk.layer_id)
        if key in table:
            raise BitstreamError(f"duplicate chunk for gof {key[0]} layer {key[1]}")
        table[key] = chunk.payload

    gof_count = header.gof_count
    available = 3
    for g in range(gof_count):
        if (g, 0) not in table:
            raise UnusableStreamError(f"base layer missing for gof {g}")
        depth = 0
        while depth < 3 and (g, depth + 1) in table:
            depth += 1
        available = min(available, depth)
    for (g, layer_id) in table:
        if g >= gof_count:
            raise BitstreamError(f"chunk for gof {g} beyond the {gof_count} the header declares")

    level = available if layers == "auto" else _resolve_level(layers)
    if level > available:
        raise BitstreamError(
            f"layer {LAYER_NAMES[level]} requested but stream only holds "
            f"{LAYER_NAMES[available]}"
        )

    config = recovery or RecoveryConfig()
    codebook = SensingCodebook(header.master_seed)
    counts = band_vector_counts(header.width, header.height, header.target_min_n)
    pieces = []
    for g in range(gof_count):
        base = _read_base_payload(table[(g, 0)], header)
        records: list[MeasurementRecord] = []
        for layer_id in range(1, level + 1):
            parsed = _parse_layer_payload(table[(g, layer_id)], layer_id, counts, codebook)
            records.extend(rec for rec, _ in parsed)
        pieces.append(_synthesize(base, records, header, level, codebook, config))
    video = np.concatenate(pieces, axis=0)
    if level == 3:
        video = video[: header.frame_count]
    return DecodedVideo(frames=video, level=level, header=header)


def _read_base_payload(payload: bytes, header: StreamHeader) -> np.ndarray:
    reader = BitReader(payload)
    chunk = read_chunk(reader)
    bh, bw = header.height >> 3, header.width >> 3
    if chunk.sample_count != bh * bw:
        raise BitstreamError(
            f"base chunk holds {chunk.sample_count} samples, geometry expects {bh * bw}"
        )
    _check_padding(reader)
    return decode_chunk(chunk).reshape((bh, bw), order="F")


def _parse_layer_payload(
    payload: bytes, layer_id: int, counts, codebook: SensingCodebook
) -> list[tuple[MeasurementRecord, object]]:
    """Records (and their coded chunks) for one gof's layer, in stream order."""
    reader = BitReader(payload)
    out = []
    for band, n, count in counts:
        if band.layer != layer_id:
            continue
        for idx in range(count):
            entry = reader.read_bits(4)
            sparsity = reader.read_bits(16)
            chunk = None
            if entry == 0:
                y = np.zeros(0, dtype=np.float64)
            else:
                chunk = read_chunk(reader)
                # raw-vector fallback (m > n) carries the n samples themselves
                expected = min(codebook.measurements(entry), n)
                if chunk.sample_count != expected:
                    raise BitstreamError(
                        f"record for {band_label(band)}[{idx}] holds "
                        f"{chunk.sample_count} samples, expected {expected}",
                        bit_offset=reader.position,
                    )
                y = decode_chunk(chunk)
            out.append((MeasurementRecord(entry, sparsity, n, y, band, idx), chunk))
    _check_padding(reader)
    return out


def _check_padding(reader: BitReader) -> None:
    if reader.remaining >= 8:
        raise BitstreamError(
            f"{reader.remaining} unparsed bits after the last record",
            bit_offset=reader.position,
        )
    while reader.remaining:
        if reader.read_bit():
            raise BitstreamError("nonzero padding bits", bit_offset=reader.position - 1)


def _synthesize(
    base: np.ndarray,
    records: list[MeasurementRecord],
    header: StreamHeader,
    level: int,
    codebook: SensingCodebook,
    config: RecoveryConfig,
) -> np.ndarray:
    pyramid = SubbandPyramid.zeros(header.width, header.height)
    pyramid.base_band[:] = base
    for band, recs in groupby(records, key=lambda r: r.band):
        rec_list = list(recs)
        vectors = np.stack([recover_record(r, codebook, config).s_hat for r in rec_list])
        pyramid.region(band)[:] = devectorize_band(vectors, band.height, band.width)
    crop = pyramid.planes[
        : 1 << level,
        : header.height >> (3 - level),
        : header.width >> (3 - level),
    ]
    out = dwt3d_inverse_partial(crop, levels=level)
    return out / math.sqrt(2.0) ** (3 - level)


def band_label(band) -> str:
    """Short human-readable band name, e.g. ``LLH:HL3``."""
    return f"{PLANE_NAMES[band.plane]}:{band.orientation}{band.spatial_level}"


def upsample_to_full(decoded: DecodedVideo) -> np.ndarray:
    """Interpolate a partial decode back to full size and frame count.

    Re-analyzes the decoded frames (exactly recovering the coefficient crop
    they came from), zero-fills the bands the stream never carried, and runs
    the full synthesis.  The result is directly comparable with the original
    video; missing detail shows up as wavelet-smooth interpolation.
    """
    from .dwt import dwt2d_forward, haar_temporal_forward

    header = decoded.header
    level = decoded.level
    if level == 3:
        return decoded.frames.copy()
    frames = decoded.frames * math.sqrt(2.0) ** (3 - level)
    per_gof = decoded.frames_per_gof
    gof_count = frames.shape[0] // per_gof
    out = []
    for g in range(gof_count):
        block = frames[g * per_gof : (g + 1) * per_gof]
        if level == 0:
            crop = block
        else:
            crop = haar_temporal_forward(dwt2d_forward(block, level), level)
        pyramid = SubbandPyramid.zeros(header.width, header.height)
        pyramid.planes[: crop.shape[0], : crop.shape[1], : crop.shape[2]] = crop
        out.append(dwt3d_inverse(pyramid))
    return np.concatenate(out, axis=0)[: header.frame_count]


@dataclass
class RecordInfo:
    """Per-record accounting row used by the rate reports."""

    gof_index: int
    layer_id: int
    band_name: str
    vector_index: int
    entry: int
    sparsity: int
    n: int
    effective_measurements: int
    coded_bits: int


@dataclass
class StreamSummary:
    header: StreamHeader
    gof_count: int
    layer_bytes: dict[str, int] = field(default_factory=dict)
    records: list[RecordInfo] = field(default_factory=list)
    total_bytes: int = 0

    @property
    def measured_samples(self) -> int:
        return sum(r.n for r in self.records)

    @property
    def effective_measurements(self) -> int:
        return sum(r.effective_measurements for r in self.records)

    @property
    def measurement_fraction(self) -> float:
        total = self.measured_samples
        return self.effective_measurements / total if total else 0.0


def describe_stream(data: bytes) -> StreamSummary:
    """Walk every chunk and record, tallying sizes and measurement counts."""
    header, chunks = parse_stream(data)
    codebook = SensingCodebook(header.master_seed)
    counts = band_vector_counts(header.width, header.height, header.target_min_n)
    summary = StreamSummary(header=header, gof_count=header.gof_count, total_bytes=len(data))
    for name in LAYER_NAMES:
        summary.layer_bytes[name] = 0
    for chunk in chunks:
        name = LAYER_NAMES[chunk.layer_id]
        summary.layer_bytes[name] += _CHUNK_OVERHEAD + len(chunk.payload)
        if chunk.layer_id == 0:
            continue
        for rec, coded in _parse_layer_payload(chunk.payload, chunk.layer_id, counts, codebook):
            bits = 20 + (coded.total_bits if coded is not None else 0)
            summary.records.append(
                RecordInfo(
                    gof_index=chunk.gof_index,
                    layer_id=chunk.layer_id,
                    band_name=band_label(rec.band),
                    vector_index=rec.vector_index,
                    entry=rec.entry,
                    sparsity=rec.sparsity,
                    n=rec.n,
                    effective_measurements=rec.effective_measurements,
                    coded_bits=bits,
                )
            )
    return summary
