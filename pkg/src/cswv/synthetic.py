"""Synthetic content with controlled coefficient structure.

These generators build videos from the coefficient domain outward, so tests
know exactly what the analysis transform will hand to the measurement stage:
a lowpass-only video has identically zero detail bands, a textured video has
a known count of strong coefficients per vector riding on weak Gaussian
texture, and ``sparse_pyramid`` skips video space entirely.
"""

from __future__ import annotations

import math

import numpy as np

from .dwt import dwt3d_inverse
from .geometry import SubbandPyramid
from .sensing import DEFAULT_TARGET_MIN_N, band_vector_counts

# Per-vector nonzero caps by vector length, sized so the selected codebook
# entry keeps m <= n with margin for the solver.
_SPARSITY_CAPS = ((64, 8), (256, 20), (1024, 60))
_DEFAULT_CAP = 100

# Constant-sequence gain of the 3-level temporal transform.
_TEMPORAL_GAIN = math.sqrt(2.0) ** 3


def sparsity_cap(n: int) -> int:
    for bound, cap in _SPARSITY_CAPS:
        if n <= bound:
            return cap
    return _DEFAULT_CAP


def smooth_field(height: int, width: int, seed: int = 0) -> np.ndarray:
    """Slowly varying image in roughly [35, 215]; the seed shifts its phase."""
    rng = np.random.default_rng(seed)
    fy = rng.uniform(0.5, 1.5)
    fx = rng.uniform(0.5, 1.5)
    py, px = rng.uniform(0.0, 2.0 * math.pi, size=2)
    y = np.arange(height)[:, None]
    x = np.arange(width)[None, :]
    wave = np.cos(2.0 * math.pi * fy * y / height + py) * np.cos(
        2.0 * math.pi * fx * x / width + px
    )
    return 125.0 + 90.0 * wave


def sparse_pyramid(
    width: int,
    height: int,
    seed: int = 0,
    *,
    value_range: tuple[float, float] = (5.0, 50.0),
    integers: bool = False,
    target_min_n: int = DEFAULT_TARGET_MIN_N,
) -> SubbandPyramid:
    """Pyramid whose every measured vector is exactly k-sparse (k capped by n).

    The base band carries a smooth field at the temporal lowpass gain.
    ``integers=True`` draws integer magnitudes, which keeps downstream
    measurement values exactly representable.
    """
    rng = np.random.default_rng(seed)
    pyramid = SubbandPyramid.zeros(width, height)
    base = smooth_field(height >> 3, width >> 3, seed) * _TEMPORAL_GAIN
    pyramid.base_band[:] = np.rint(base) if integers else base
    lo, hi = value_range
    for band, n, count in band_vector_counts(width, height, target_min_n):
        total = band.size
        flat = np.zeros(total)
        for i in range(count):
            span = min(n, total - i * n)
            k = min(sparsity_cap(n), max(1, span // 8))
            positions = i * n + rng.choice(span, size=k, replace=False)
            if integers:
                magnitudes = rng.integers(int(lo), int(hi) + 1, size=k).astype(np.float64)
            else:
                magnitudes = rng.uniform(lo, hi, size=k)
            flat[positions] = magnitudes * rng.choice((-1.0, 1.0), size=k)
        pyramid.region(band)[:] = flat.reshape(band.height, band.width, order="F")
    return pyramid


def lowpass_only_video(width: int, height: int, seed: int = 0) -> np.ndarray:
    """Static 8-frame video whose detail bands are identically zero.

    Built by inverting a base-only pyramid, so re-analyzing the video puts
    nothing but float residue (~1e-13) outside the base band.
    """
    pyramid = SubbandPyramid.zeros(width, height)
    pyramid.base_band[:] = smooth_field(height >> 3, width >> 3, seed) * _TEMPORAL_GAIN
    return dwt3d_inverse(pyramid)


def textured_video(
    width: int,
    height: int,
    seed: int = 0,
    *,
    blob_range: tuple[float, float] = (20.0, 60.0),
    texture_sigma: float = 0.5,
    texture_range: tuple[float, float] | None = None,
    blobs_per_vector: int = 5,
    target_min_n: int = DEFAULT_TARGET_MIN_N,
) -> np.ndarray:
    """8 frames mixing smooth content, strong sparse detail, and weak texture.

    Every measured vector holds ``blobs_per_vector`` coefficients drawn from
    ``blob_range`` on top of N(0, texture_sigma) texture, so a threshold
    sweep moves the per-vector sparsity between "almost everything" and
    "blobs only" in a controlled way.  ``texture_range`` swaps the Gaussian
    texture for signed uniform magnitudes; with the whole range below the
    encoder threshold the surviving support is exactly the blobs, making the
    reconstruction error a pure function of quantizer step.
    """
    rng = np.random.default_rng(seed)
    pyramid = SubbandPyramid.zeros(width, height)
    if texture_range is not None:
        t_lo, t_hi = texture_range
        magnitudes = rng.uniform(t_lo, t_hi, pyramid.planes.shape)
        pyramid.planes[:] = magnitudes * rng.choice((-1.0, 1.0), pyramid.planes.shape)
    else:
        pyramid.planes[:] = rng.normal(0.0, texture_sigma, pyramid.planes.shape)
    lo, hi = blob_range
    for band, n, count in band_vector_counts(width, height, target_min_n):
        total = band.size
        flat = pyramid.region(band).reshape(-1, order="F").copy()
        for i in range(count):
            span = min(n, total - i * n)
            k = min(blobs_per_vector, span)
            positions = i * n + rng.choice(span, size=k, replace=False)
            flat[positions] = rng.uniform(lo, hi, size=k) * rng.choice((-1.0, 1.0), size=k)
        pyramid.region(band)[:] = flat.reshape(band.height, band.width, order="F")
    pyramid.base_band[:] = smooth_field(height >> 3, width >> 3, seed) * _TEMPORAL_GAIN
    return dwt3d_inverse(pyramid)
