"""Transform tests against independent convolution / matrix oracles.

The 2-D oracle applies the classic 9-tap/7-tap analysis pair by explicit
convolution over a whole-sample symmetric extension; the temporal oracle is
the 8x8 orthonormal two-band matrix written out longhand.  The lifting
implementation must match both, not merely invert itself.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cswv.dwt import (
    dwt2d_forward,
    dwt2d_inverse,
    dwt3d_forward,
    dwt3d_inverse,
    dwt3d_inverse_partial,
    haar_temporal_forward,
    haar_temporal_inverse,
)
from cswv.errors import DimensionError

# analysis lowpass (offsets -4..4) and highpass (offsets -3..3), unit DC gain
H0 = np.array([
    0.026748757410810, -0.016864118442875, -0.078223266528988,
    0.266864118442875, 0.602949018236360, 0.266864118442875,
    -0.078223266528988, -0.016864118442875, 0.026748757410810,
])
H1 = np.array([
    0.091271763114250, -0.057543526228500, -0.591271763114250,
    1.115087052457000, -0.591271763114250, -0.057543526228500,
    0.091271763114250,
])

SQRT8 = 2.0 * math.sqrt(2.0)
# 3-level orthonormal two-band analysis over 8 samples, one row per output plane
HAAR8 = np.array([
    [1, 1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, -1, -1, -1, -1],
]) / SQRT8
HAAR8 = np.vstack([
    HAAR8,
    np.array([[1, 1, -1, -1, 0, 0, 0, 0], [0, 0, 0, 0, 1, 1, -1, -1]]) / 2.0,
    np.array([
        [1, -1, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, -1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, -1, 0, 0],
        [0, 0, 0, 0, 0, 0, 1, -1],
    ]) / math.sqrt(2.0),
])


def wss_extend(x, pad):
    left = x[pad:0:-1]
    right = x[-2:-2 - pad:-1]
    return np.concatenate([left, x, right])


def conv97_level(plane):
    """One analysis level by brute-force convolution, rows then columns."""

    def split(x):
        n = len(x)
        ext = wss_extend(x, 4)
        low = np.array([H0 @ ext[2 * i : 2 * i + 9] for i in range(n // 2)])
        high = np.array([H1 @ ext[2 * i + 2 : 2 * i + 9] for i in range(n // 2)])
        return np.concatenate([low, high])

    rows = np.array([split(r) for r in plane])
    return np.array([split(c) for c in rows.T]).T


class TestSpatial:
    def test_matches_convolution_oracle(self, rng):
        plane = rng.normal(size=(16, 16)) * 50.0
        ours = dwt2d_forward(plane, levels=1)
        oracle = conv97_level(plane)
        assert np.max(np.abs(ours - oracle)) < 1e-9

    def test_three_level_nesting_matches_oracle(self, rng):
        plane = rng.normal(size=(16, 16))
        ours = dwt2d_forward(plane, levels=2)
        oracle = conv97_level(plane)
        oracle[:8, :8] = conv97_level(oracle[:8, :8])
        assert np.max(np.abs(ours - oracle)) < 1e-9

    def test_round_trip(self, rng):
        plane = rng.normal(size=(40, 64)) * 255.0
        back = dwt2d_inverse(dwt2d_forward(plane))
        assert np.max(np.abs(back - plane)) < 1e-10

    def test_unit_dc_gain(self):
        flat = np.full((16, 16), 9.25)
        co = dwt2d_forward(flat, levels=1)
        assert abs(co[:8, :8].mean() - 9.25) < 1e-10
        # detail residue is float noise, not exactly zero
        assert np.max(np.abs(co[8:, :])) < 1e-10

    @settings(max_examples=20, deadline=None)
    @given(
        h=st.integers(1, 6).map(lambda k: 8 * k),
        w=st.integers(1, 6).map(lambda k: 8 * k),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_round_trip_any_size(self, h, w, seed):
        plane = np.random.default_rng(seed).normal(size=(h, w)) * 100.0
        back = dwt2d_inverse(dwt2d_forward(plane))
        assert np.max(np.abs(back - plane)) < 1e-9


class TestTemporal:
    def test_matches_matrix_oracle(self, rng):
        frames = rng.normal(size=(8, 4, 4))
        ours = haar_temporal_forward(frames)
        oracle = np.einsum("pt,thw->phw", HAAR8, frames)
        assert np.max(np.abs(ours - oracle)) < 1e-12

    def test_round_trip(self, rng):
        frames = rng.normal(size=(8, 8, 8)) * 255.0
        back = haar_temporal_inverse(haar_temporal_forward(frames))
        assert np.max(np.abs(back - frames)) < 1e-12

    def test_partial_levels(self, rng):
        frames = rng.normal(size=(2, 4, 4))
        back = haar_temporal_inverse(haar_temporal_forward(frames, levels=1), levels=1)
        assert np.max(np.abs(back - frames)) < 1e-12

    def test_wrong_plane_count(self, rng):
        with pytest.raises(DimensionError):
            haar_temporal_forward(rng.normal(size=(6, 4, 4)))


class TestThreeDee:
    def test_round_trip(self, rng):
        gof = rng.uniform(0.0, 255.0, size=(8, 32, 24))
        pyramid = dwt3d_forward(gof)
        back = dwt3d_inverse(pyramid)
        assert np.max(np.abs(back - gof)) < 1e-9

    def test_constant_video_concentrates_in_base(self):
        gof = np.full((8, 16, 16), 100.0)
        pyramid = dwt3d_forward(gof)
        assert np.allclose(pyramid.base_band, 100.0 * SQRT8)
        detail = pyramid.planes.copy()
        detail[0, :2, :2] = 0.0
        assert np.max(np.abs(detail)) < 1e-9  # small residue, not exact zero

    def test_partial_full_depth_equals_inverse(self, rng):
        gof = rng.normal(size=(8, 16, 16))
        pyramid = dwt3d_forward(gof)
        full = dwt3d_inverse(pyramid)
        partial = dwt3d_inverse_partial(pyramid.planes, levels=3)
        assert np.max(np.abs(full - partial)) < 1e-12

    @pytest.mark.parametrize("level", [0, 1, 2])
    def test_partial_synthesis_is_invertible(self, rng, level):
        """Re-analyzing a partial decode must land back on the cropped planes."""
        gof = rng.normal(size=(8, 32, 32)) * 10.0
        pyramid = dwt3d_forward(gof)
        crop = pyramid.planes[: 1 << level, : 32 >> (3 - level), : 32 >> (3 - level)]
        out = dwt3d_inverse_partial(crop, levels=level)
        assert out.shape == crop.shape
        if level == 0:
            again = out
        else:
            again = haar_temporal_forward(dwt2d_forward(out, level), level)
        assert np.max(np.abs(again - crop)) < 1e-10

    def test_partial_level0_requires_single_plane(self, rng):
        with pytest.raises(DimensionError):
            dwt3d_inverse_partial(rng.normal(size=(2, 4, 4)), levels=0)
