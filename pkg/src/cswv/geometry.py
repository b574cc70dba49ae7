"""Sub-band geometry for the fixed 3-level spatial / 3-level temporal scheme.

A group of 8 frames transforms into 8 coefficient planes, ordered by temporal
band:

    index   0     1     2      3      4..7
    name    LLL   LLH   LH0    LH1    H0..H3
    t-level 3     3     2      2      1

Every plane carries a full 3-level spatial pyramid in the usual nested layout
(the deepest LL block in the top-left corner).  A band is addressed by
(plane, spatial_level, orientation); its scalability group is
min(temporal_level, spatial_level), and group g lands in enhancement layer
4 - g.  The spatial LL of the LLL plane is the base layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, StructureError

SPATIAL_LEVELS = 3
TEMPORAL_LEVELS = 3
NUM_PLANES = 8

PLANE_NAMES = ("LLL", "LLH", "LH0", "LH1", "H0", "H1", "H2", "H3")
PLANE_TEMPORAL_LEVEL = (3, 3, 2, 2, 1, 1, 1, 1)

LAYER_NAMES = ("BL", "EL1", "EL2", "EL3")

# Per-plane spatial band walk: deepest level first, LL before the detail
# orientations, matching the order measurements are emitted in.
_SPATIAL_WALK = (
    (3, "LL"), (3, "LH"), (3, "HL"), (3, "HH"),
    (2, "LH"), (2, "HL"), (2, "HH"),
    (1, "LH"), (1, "HL"), (1, "HH"),
)


@dataclass(frozen=True)
class Band:
    """One rectangular coefficient region of the 3-D decomposition."""

    plane: int
    spatial_level: int
    orientation: str
    rows: tuple[int, int]
    cols: tuple[int, int]

    @property
    def temporal_level(self) -> int:
        return PLANE_TEMPORAL_LEVEL[self.plane]

    @property
    def group(self) -> int:
        """Scalability group: the shallower of the two decomposition depths."""
        return min(self.temporal_level, self.spatial_level)

    @property
    def is_base(self) -> bool:
        return self.plane == 0 and self.spatial_level == SPATIAL_LEVELS and self.orientation == "LL"

    @property
    def layer(self) -> int:
        """0 for the base layer, 1..3 for enhancement layers EL1..EL3."""
        return 0 if self.is_base else 4 - self.group

    @property
    def height(self) -> int:
        return self.rows[1] - self.rows[0]

    @property
    def width(self) -> int:
        return self.cols[1] - self.cols[0]

    @property
    def size(self) -> int:
        return self.height * self.width


def layer_index(name: str) -> int:
    try:
        return LAYER_NAMES.index(name.upper())
    except ValueError:
        raise ValueError(f"unknown layer {name!r}, expected one of {LAYER_NAMES}") from None


def _spatial_rect(height: int, width: int, level: int, orientation: str):
    h = height >> level
    w = width >> level
    top = 0 if orientation in ("LL", "HL") else h
    left = 0 if orientation in ("LL", "LH") else w
    return (top, top + h), (left, left + w)


@lru_cache(maxsize=64)
def band_layout(width: int, height: int) -> tuple[Band, ...]:
    """All 80 bands in plane-major order (base band first)."""
    if width % 8 or height % 8:
        raise DimensionError(f"plane size must be divisible by 8, got {width}x{height}")
    bands = []
    for plane in range(NUM_PLANES):
        for level, orientation in _SPATIAL_WALK:
            if orientation == "LL" and level != SPATIAL_LEVELS:
                continue
            rows, cols = _spatial_rect(height, width, level, orientation)
            bands.append(Band(plane, level, orientation, rows, cols))
    return tuple(bands)


@lru_cache(maxsize=64)
def record_bands(width: int, height: int) -> tuple[Band, ...]:
    """Measured bands in transmission order.

    Deepest scalability group first; within a group, planes in temporal order,
    each contributing its bands deepest-spatial-level first.  The base band is
    excluded (it is coded directly, not measured).
    """
    per_plane: dict[int, list[Band]] = {p: [] for p in range(NUM_PLANES)}
    for band in band_layout(width, height):
        if not band.is_base:
            per_plane[band.plane].append(band)
    ordered = []
    for group in (3, 2, 1):
        for plane in range(NUM_PLANES):
            ordered.extend(b for b in per_plane[plane] if b.group == group)
    return tuple(ordered)


def bands_for_layer(width: int, height: int, layer: int) -> tuple[Band, ...]:
    return tuple(b for b in record_bands(width, height) if b.layer == layer)


@dataclass
class SubbandPyramid:
    """Stack of 8 coefficient planes for one group of frames."""

    width: int
    height: int
    planes: np.ndarray  # (8, height, width) float64

    def __post_init__(self):
        expected = (NUM_PLANES, self.height, self.width)
        if self.planes.shape != expected:
            raise StructureError(
                f"plane stack has shape {self.planes.shape}, expected {expected}"
            )

    @classmethod
    def zeros(cls, width: int, height: int) -> "SubbandPyramid":
        return cls(width, height, np.zeros((NUM_PLANES, height, width)))

    def bands(self) -> tuple[Band, ...]:
        return band_layout(self.width, self.height)

    def region(self, band: Band) -> np.ndarray:
        """Writable view of one band's rectangle."""
        return self.planes[band.plane, band.rows[0] : band.rows[1], band.cols[0] : band.cols[1]]

    @property
    def base_band(self) -> np.ndarray:
        (rows, cols) = _spatial_rect(self.height, self.width, SPATIAL_LEVELS, "LL")
        return self.planes[0, rows[0] : rows[1], cols[0] : cols[1]]
