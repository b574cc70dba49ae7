"""3-D wavelet transform: lifted 9/7 in space, orthonormal Haar in time.

The spatial stage is the irreversible 9/7 filter pair in its standard lifting
factorization (four lifting steps plus the final scaling pair), applied with
whole-sample symmetric boundary extension.  All three spatial levels are
computed on every frame before any temporal step; the temporal stage then
runs three levels of (a+b)/sqrt(2), (a-b)/sqrt(2) pairing over the 8 planes.

Coefficient planes use the nested layout: at each level the lowpass quadrant
is the top-left block, the horizontal-detail band (HL) the top-right, the
vertical-detail band (LH) the bottom-left, HH the bottom-right.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError
from .geometry import NUM_PLANES, SPATIAL_LEVELS, TEMPORAL_LEVELS, SubbandPyramid

ALPHA = -1.586134342059924
BETA = -0.052980118572961
GAMMA = 0.882911075530934
DELTA = 0.443506852043971
ZETA = 1.230174104914001  # lowpass scaled by 1/ZETA, highpass by ZETA

_SQRT2 = math.sqrt(2.0)


def _next(a: np.ndarray) -> np.ndarray:
    # right neighbor under whole-sample symmetric extension
    return np.concatenate([a[..., 1:], a[..., -1:]], axis=-1)


def _prev(a: np.ndarray) -> np.ndarray:
    # left neighbor under whole-sample symmetric extension
    return np.concatenate([a[..., :1], a[..., :-1]], axis=-1)


def _fwd_lift(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One forward 9/7 stage along the last axis; returns (low, high)."""
    even = x[..., 0::2].copy()
    odd = x[..., 1::2].copy()
    odd += ALPHA * (even + _next(even))
    even += BETA * (odd + _prev(odd))
    odd += GAMMA * (even + _next(even))
    even += DELTA * (odd + _prev(odd))
    return even / ZETA, odd * ZETA


def _inv_lift(low: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Inverse of :func:`_fwd_lift`; interleaves back along the last axis."""
    even = low * ZETA
    odd = high / ZETA
    even -= DELTA * (odd + _prev(odd))
    odd -= GAMMA * (even + _next(even))
    even -= BETA * (odd + _prev(odd))
    odd -= ALPHA * (even + _next(even))
    out = np.empty(even.shape[:-1] + (even.shape[-1] * 2,), dtype=np.float64)
    out[..., 0::2] = even
    out[..., 1::2] = odd
    return out


def _fwd_level_2d(block: np.ndarray) -> np.ndarray:
    """One 2-D analysis level on ``block``; returns the four quadrants packed."""
    low, high = _fwd_lift(block)
    step1 = np.concatenate([low, high], axis=-1)
    low, high = _fwd_lift(step1.swapaxes(-1, -2))
    return np.concatenate([low, high], axis=-1).swapaxes(-1, -2)


def _inv_level_2d(block: np.ndarray) -> np.ndarray:
    h = block.shape[-2] // 2
    cols = _inv_lift(
        block.swapaxes(-1, -2)[..., :h], block.swapaxes(-1, -2)[..., h:]
    ).swapaxes(-1, -2)
    w = cols.shape[-1] // 2
    return _inv_lift(cols[..., :w], cols[..., w:])


def _check_plane(plane: np.ndarray, levels: int) -> None:
    if plane.ndim < 2:
        raise DimensionError("expected a 2-D plane")
    h, w = plane.shape[-2:]
    d = 1 << levels
    if h % d or w % d or h < d or w < d:
        raise DimensionError(
            f"plane size {w}x{h} does not support {levels} dyadic levels"
        )


def dwt2d_forward(plane: np.ndarray, levels: int = SPATIAL_LEVELS) -> np.ndarray:
    """Multi-level 2-D 9/7 analysis in the nested coefficient layout."""
    _check_plane(plane, levels)
    out = np.array(plane, dtype=np.float64, copy=True)
    h, w = out.shape[-2:]
    for _ in range(levels):
        out[..., :h, :w] = _fwd_level_2d(out[..., :h, :w])
        h //= 2
        w //= 2
    return out


def dwt2d_inverse(coeffs: np.ndarray, levels: int = SPATIAL_LEVELS) -> np.ndarray:
    """Exact inverse of :func:`dwt2d_forward`."""
    _check_plane(coeffs, levels)
    out = np.array(coeffs, dtype=np.float64, copy=True)
    full_h, full_w = out.shape[-2:]
    for level in range(levels, 0, -1):
        h = full_h >> (level - 1)
        w = full_w >> (level - 1)
        out[..., :h, :w] = _inv_level_2d(out[..., :h, :w])
    return out


def haar_temporal_forward(planes: np.ndarray, levels: int = TEMPORAL_LEVELS) -> np.ndarray:
    """Orthonormal Haar over the leading axis, deepest lowpass ending up first.

    With 8 planes and 3 levels the output order is LLL, LLH, LH0, LH1, H0..H3.
    """
    planes = np.asarray(planes, dtype=np.float64)
    if planes.shape[0] != 1 << levels:
        raise DimensionError(
            f"need {1 << levels} planes for {levels} temporal levels, got {planes.shape[0]}"
        )
    work = planes.copy()
    active = planes.shape[0]
    for _ in range(levels):
        a = work[0:active:2]
        b = work[1:active:2]
        low = (a + b) / _SQRT2
        high = (a - b) / _SQRT2
        work[0 : active // 2] = low
        work[active // 2 : active] = high
        active //= 2
    return work


def haar_temporal_inverse(planes: np.ndarray, levels: int = TEMPORAL_LEVELS) -> np.ndarray:
    """Exact inverse of :func:`haar_temporal_forward`."""
    planes = np.asarray(planes, dtype=np.float64)
    if planes.shape[0] != 1 << levels:
        raise DimensionError(
            f"need {1 << levels} planes for {levels} temporal levels, got {planes.shape[0]}"
        )
    work = planes.copy()
    for level in range(levels):
        active = 2 << level
        low = work[0 : active // 2].copy()
        high = work[active // 2 : active].copy()
        work[0:active:2] = (low + high) / _SQRT2
        work[1:active:2] = (low - high) / _SQRT2
    return work


def dwt3d_forward(gof: np.ndarray) -> SubbandPyramid:
    """Spatial-then-temporal analysis of one group of 8 frames."""
    gof = np.asarray(gof, dtype=np.float64)
    if gof.ndim != 3 or gof.shape[0] != NUM_PLANES:
        raise DimensionError(f"expected a (8, H, W) group of frames, got {gof.shape}")
    spatial = dwt2d_forward(gof, SPATIAL_LEVELS)
    planes = haar_temporal_forward(spatial, TEMPORAL_LEVELS)
    height, width = gof.shape[1:]
    return SubbandPyramid(width, height, planes)


def dwt3d_inverse(pyramid: SubbandPyramid) -> np.ndarray:
    """Temporal-then-spatial synthesis back to 8 frames."""
    spatial = haar_temporal_inverse(pyramid.planes, TEMPORAL_LEVELS)
    return dwt2d_inverse(spatial, SPATIAL_LEVELS)


def dwt3d_inverse_partial(planes: np.ndarray, levels: int) -> np.ndarray:
    """Synthesize the coarse approximation carried by a truncated plane stack.

    ``planes`` holds the first ``2**levels`` temporal planes, each cropped to
    its top-left block of ``levels`` spatial levels.  ``levels == 3`` is the
    full inverse; ``levels == 0`` returns the single plane unchanged.  The
    un-inverted temporal gain of sqrt(2) per remaining level is NOT divided
    out here; callers normalize for display.
    """
    planes = np.asarray(planes, dtype=np.float64)
    if levels == 0:
        if planes.shape[0] != 1:
            raise DimensionError("levels=0 expects a single plane")
        return planes.copy()
    frames = haar_temporal_inverse(planes, levels)
    return dwt2d_inverse(frames, levels)
