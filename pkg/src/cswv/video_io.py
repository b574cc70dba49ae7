"""Raw 8-bit luma video I/O and group-of-frames partitioning.

Frames are H x W float64 arrays internally; sample values are only forced
back onto the 8-bit grid when bytes are written out.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DimensionError, FormatError, TruncatedInputError

GOF_SIZE = 8

RAW_MAGIC = b"CSWV-RAW"


def _check_dims(width: int, height: int) -> None:
    # raw parsing accepts any positive size; codec geometry is checked at encode
    if width <= 0 or height <= 0:
        raise DimensionError(f"frame size must be positive, got {width}x{height}")


def read_raw_video(
    data: bytes,
    width: int,
    height: int,
    frame_count: int,
    chroma: str = "none",
) -> np.ndarray:
    """Parse planar raw video into a (frames, height, width) float array.

    ``chroma="420"`` skips the two quarter-size chroma planes that follow each
    luma plane in yuv420p input; only luma is kept either way.
    """
    _check_dims(width, height)
    if frame_count < 0:
        raise DimensionError("frame_count must be nonnegative")
    if chroma not in ("none", "420"):
        raise ValueError(f"unknown chroma mode {chroma!r}")

    luma = width * height
    stride = luma + (luma // 2 if chroma == "420" else 0)
    frames = np.empty((frame_count, height, width), dtype=np.float64)
    for i in range(frame_count):
        start = i * stride
        end = start + luma
        if end > len(data):
            raise TruncatedInputError(
                f"frame {i} needs bytes [{start}, {end}) but stream has {len(data)}",
                byte_offset=len(data),
            )
        plane = np.frombuffer(data, dtype=np.uint8, count=luma, offset=start)
        frames[i] = plane.reshape(height, width)
    return frames


def write_raw_video(frames: np.ndarray) -> bytes:
    """Serialize frames as planar 8-bit luma, rounding half-up and clamping."""
    if len(frames) == 0:
        return b""
    arr = np.asarray(frames, dtype=np.float64)
    # round-half-up, then clamp to the byte range
    quantized = np.floor(arr + 0.5)
    return np.clip(quantized, 0.0, 255.0).astype(np.uint8).tobytes()


def partition_gofs(frames: np.ndarray) -> tuple[np.ndarray, int]:
    """Split frames into groups of 8, repeating the last frame to fill the tail.

    Returns ``(gofs, padding)`` where gofs has shape (n_gofs, 8, H, W) and
    padding counts the repeated frames appended to the final group.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if len(frames) == 0:
        return frames.reshape((0, GOF_SIZE) + frames.shape[1:]), 0
    padding = (-len(frames)) % GOF_SIZE
    if padding:
        tail = np.repeat(frames[-1:], padding, axis=0)
        frames = np.concatenate([frames, tail], axis=0)
    gofs = frames.reshape(len(frames) // GOF_SIZE, GOF_SIZE, *frames.shape[1:])
    return gofs, padding


def write_headered_raw(frames: np.ndarray, width: int, height: int) -> bytes:
    """Raw video prefixed with a small self-describing header."""
    header = RAW_MAGIC + struct.pack("<III", width, height, len(frames))
    return header + write_raw_video(frames)


def read_headered_raw(data: bytes) -> tuple[np.ndarray, int, int]:
    """Inverse of :func:`write_headered_raw`; returns (frames, width, height)."""
    if len(data) < len(RAW_MAGIC) + 12 or data[: len(RAW_MAGIC)] != RAW_MAGIC:
        raise FormatError("missing CSWV-RAW header")
    width, height, count = struct.unpack_from("<III", data, len(RAW_MAGIC))
    frames = read_raw_video(data[len(RAW_MAGIC) + 12 :], width, height, count)
    return frames, width, height
