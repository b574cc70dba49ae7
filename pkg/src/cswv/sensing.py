"""Adaptive compressed-sensing measurement of thresholded sub-bands.

Each sub-band is hard-thresholded, flattened column by column into vectors of
length n = 2**p * band_height (smallest p >= 1 covering the measurement
target), and measured as y = Phi @ v.  Phi is a +/-1 Bernoulli matrix drawn
from a 16-entry codebook: the vector's exact l0-norm K selects a row count m
through a fixed K-range table, so sparser vectors buy fewer measurements.

Both ends derive Phi from (master_seed, entry, n) with a counter-based
generator, so the matrices never travel in the stream.

When the table asks for more rows than the vector has samples (dense content
in a small band), measurement degenerates gracefully: the raw vector itself
is recorded (m_eff = n) and the decoder detects this from the entry index
alone.  ``measure`` itself refuses such requests; the pyramid walk routes
around it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CodebookError, DimensionError, NumericError
from .geometry import Band, SubbandPyramid, record_bands

DEFAULT_MASTER_SEED = 0xA5C55EED
DEFAULT_TARGET_MIN_N = 1024

# (upper K bound inclusive, measurement rows).  Entry 0 is the exact-zero
# case; the last entry is open-ended.
_CODEBOOK_ROWS: tuple[tuple[int | None, int], ...] = (
    (0, 0),
    (10, 50),
    (20, 130),
    (50, 240),
    (100, 370),
    (150, 470),
    (200, 650),
    (250, 780),
    (300, 920),
    (350, 1080),
    (400, 1220),
    (450, 1400),
    (500, 1550),
    (550, 1700),
    (600, 1850),
    (None, 2000),
)


@dataclass(frozen=True)
class CodebookEntry:
    index: int
    k_low: int  # exclusive lower bound, except entry 0 which is K == 0
    k_high: int | None  # inclusive upper bound, None = unbounded
    measurements: int


def _build_entries() -> tuple[CodebookEntry, ...]:
    entries = []
    low = -1
    for index, (high, m) in enumerate(_CODEBOOK_ROWS):
        entries.append(CodebookEntry(index, low, high, m))
        low = high if high is not None else low
    return tuple(entries)


CODEBOOK_ENTRIES = _build_entries()
_UPPER_BOUNDS = np.array([row[0] for row in _CODEBOOK_ROWS[:-1]], dtype=np.int64)


def select_entry(k: int) -> int:
    """Codebook index for an exact sparsity count."""
    if k < 0:
        raise ValueError(f"sparsity must be nonnegative, got {k}")
    if k == 0:
        return 0
    return int(np.searchsorted(_UPPER_BOUNDS, k, side="left"))


class SensingCodebook:
    """Measurement matrices keyed by (entry index, vector length).

    Matrices are built lazily and memoized; entries are +1/-1 with no scaling.
    """

    def __init__(self, master_seed: int = DEFAULT_MASTER_SEED):
        self.master_seed = int(master_seed)
        self._cache: dict[tuple[int, int], np.ndarray] = {}

    entries = CODEBOOK_ENTRIES

    def measurements(self, index: int) -> int:
        return CODEBOOK_ENTRIES[index].measurements

    def select_entry(self, k: int) -> int:
        return select_entry(k)

    def matrix(self, index: int, n: int) -> np.ndarray:
        m = self.measurements(index)
        if m > n:
            raise CodebookError(
                f"codebook entry {index} has {m} rows but vectors hold only {n} samples"
            )
        key = (index, n)
        mat = self._cache.get(key)
        if mat is None:
            mat = _bernoulli_matrix(self.master_seed, index, m, n)
            self._cache[key] = mat
        return mat


def _bernoulli_matrix(master_seed: int, index: int, m: int, n: int) -> np.ndarray:
    """Deterministic +/-1 matrix, one unbiased bit per entry.

    The generator is counter-based (Philox) keyed by (master_seed, index, n),
    so any row subset is reproducible from the stream header alone.
    """
    if m == 0:
        return np.zeros((0, n), dtype=np.float64)
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF, (index << 40) | n], dtype=np.uint64)
    total = m * n
    words = np.random.Philox(key=key).random_raw((total + 63) // 64)
    raw = np.frombuffer(np.ascontiguousarray(words, dtype="<u8").tobytes(), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[:total]
    return (bits.astype(np.float64) * 2.0 - 1.0).reshape(m, n)


def hard_threshold(values: np.ndarray, threshold: float) -> np.ndarray:
    """Zero out entries with magnitude strictly below ``threshold``."""
    if not (threshold >= 0.0) or not math.isfinite(threshold):
        raise ValueError(f"threshold must be finite and >= 0, got {threshold}")
    values = np.asarray(values, dtype=np.float64)
    return np.where(np.abs(values) < threshold, 0.0, values)


def l0_norm(v: np.ndarray) -> int:
    """Count of exactly nonzero entries; no epsilon."""
    return int(np.count_nonzero(np.asarray(v)))


def vector_length(band_height: int, region_total: int, target_min_n: int) -> int:
    """Smallest n = 2**p * band_height (p >= 1) covering the measurement target.

    The target is min(target_min_n, region_total): bands smaller than the
    global target are covered by a single vector rather than padded up to it.
    """
    if band_height <= 0 or region_total <= 0:
        raise DimensionError("band must be non-empty")
    goal = min(target_min_n, region_total)
    n = 2 * band_height
    while n < goal:
        n *= 2
    return n


def vectorize_band(
    region: np.ndarray, target_min_n: int = DEFAULT_TARGET_MIN_N
) -> np.ndarray:
    """Stack a band's columns top-to-bottom, left-to-right into fixed-length vectors.

    Returns an array of shape (count, n); the final vector is zero-padded.
    """
    region = np.asarray(region, dtype=np.float64)
    if region.ndim != 2:
        raise DimensionError("band region must be 2-D")
    height, width = region.shape
    n = vector_length(height, region.size, target_min_n)
    flat = region.reshape(-1, order="F")
    count = -(-flat.size // n)
    padded = np.zeros(count * n, dtype=np.float64)
    padded[: flat.size] = flat
    return padded.reshape(count, n)


def devectorize_band(vectors: np.ndarray, height: int, width: int) -> np.ndarray:
    """Inverse of :func:`vectorize_band`, discarding the zero padding."""
    flat = np.asarray(vectors, dtype=np.float64).reshape(-1)
    if flat.size < height * width:
        raise DimensionError(
            f"{flat.size} samples cannot fill a {height}x{width} region"
        )
    return flat[: height * width].reshape(height, width, order="F").copy()


@dataclass
class MeasurementRecord:
    """One measured vector: codebook entry, exact sparsity, and y = Phi @ v.

    ``len(y)`` equals the entry's row count, except in raw-vector fallback
    where it equals ``n``.  ``band``/``vector_index`` trace the source region.
    """

    entry: int
    sparsity: int
    n: int
    y: np.ndarray
    band: Band | None = None
    vector_index: int = 0

    @property
    def raw_fallback(self) -> bool:
        return CODEBOOK_ENTRIES[self.entry].measurements > self.n

    @property
    def effective_measurements(self) -> int:
        return min(CODEBOOK_ENTRIES[self.entry].measurements, self.n)


def measure(v: np.ndarray, codebook: SensingCodebook) -> MeasurementRecord:
    """Measure one vector with the codebook entry its sparsity selects."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError("measurement input must be a 1-D vector")
    if not np.all(np.isfinite(v)):
        raise NumericError("measurement input contains non-finite values")
    k = l0_norm(v)
    entry = select_entry(k)
    phi = codebook.matrix(entry, v.size)  # raises CodebookError when m > n
    return MeasurementRecord(entry, k, v.size, phi @ v)


def sense_pyramid(
    pyramid: SubbandPyramid,
    threshold: float,
    codebook: SensingCodebook,
    target_min_n: int = DEFAULT_TARGET_MIN_N,
) -> tuple[np.ndarray, list[MeasurementRecord]]:
    """Threshold and measure every non-base band; the base band passes through.

    Records come out in transmission order (see ``geometry.record_bands``).
    Vectors whose selected entry would need more rows than samples fall back
    to carrying the raw vector.
    """
    base = pyramid.base_band.copy()
    records: list[MeasurementRecord] = []
    for band in record_bands(pyramid.width, pyramid.height):
        kept = hard_threshold(pyramid.region(band), threshold)
        for idx, v in enumerate(vectorize_band(kept, target_min_n)):
            k = l0_norm(v)
            entry = select_entry(k)
            if codebook.measurements(entry) > v.size:
                y = v.copy()
            else:
                y = codebook.matrix(entry, v.size) @ v
            records.append(MeasurementRecord(entry, k, v.size, y, band, idx))
    return base, records


@lru_cache(maxsize=64)
def band_vector_counts(
    width: int, height: int, target_min_n: int = DEFAULT_TARGET_MIN_N
) -> tuple[tuple[Band, int, int], ...]:
    """(band, n, vector count) for every measured band, in transmission order."""
    out = []
    for band in record_bands(width, height):
        n = vector_length(band.height, band.size, target_min_n)
        out.append((band, n, -(-band.size // n)))
    return tuple(out)
