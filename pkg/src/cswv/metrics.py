"""Quality, rate, and workload accounting.

PSNR is reported per frame and pooled: the overall figure uses the mean
squared error across all pixels of all frames, not the mean of per-frame
PSNRs, so black frames cannot dominate the average.  NMSE against an
all-zero truth degenerates to plain error energy and is flagged as such.

``complexity_report`` compares the propagation-based operation counts of the
two-phase solver against a conventional per-iteration matrix multiply;
``rate_report`` re-walks a finished stream so every byte is attributed to a
layer.  ``emit_curves`` runs small solver experiments and writes tidy CSV
(columns experiment, x, series, value) for plotting.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .bitstream import _CHUNK_OVERHEAD, _HEADER_SIZE, describe_stream
from .errors import DimensionError
from .recovery import RecoveryConfig, make_solver
from .sensing import SensingCodebook, select_entry


@dataclass
class PsnrReport:
    per_frame: list[float]
    mse: float
    overall: float


def _psnr_from_mse(mse: float, peak: float) -> float:
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def psnr(reference: np.ndarray, test: np.ndarray, peak: float = 255.0) -> PsnrReport:
    """Peak signal-to-noise ratio; identical inputs report infinity."""
    reference = np.asarray(reference, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if reference.shape != test.shape:
        raise DimensionError(
            f"shape mismatch: reference {reference.shape} vs test {test.shape}"
        )
    if reference.ndim == 2:
        reference = reference[None]
        test = test[None]
    if reference.ndim != 3:
        raise DimensionError(f"expected (frames, H, W) or (H, W), got {reference.shape}")
    err = reference - test
    per_frame_mse = np.mean(err * err, axis=(1, 2))
    pooled = float(np.mean(per_frame_mse))
    return PsnrReport(
        per_frame=[_psnr_from_mse(float(m), peak) for m in per_frame_mse],
        mse=pooled,
        overall=_psnr_from_mse(pooled, peak),
    )


@dataclass
class NmseReport:
    value: float
    zero_truth: bool


def nmse(estimate: np.ndarray, truth: np.ndarray) -> NmseReport:
    """Normalized mean squared error ||e||^2 / ||truth||^2."""
    estimate = np.asarray(estimate, dtype=np.float64).reshape(-1)
    truth = np.asarray(truth, dtype=np.float64).reshape(-1)
    if estimate.shape != truth.shape:
        raise DimensionError(f"shape mismatch: {estimate.shape} vs {truth.shape}")
    err = estimate - truth
    err_energy = float(err @ err)
    truth_energy = float(truth @ truth)
    if truth_energy == 0.0:
        return NmseReport(err_energy, zero_truth=True)
    return NmseReport(err_energy / truth_energy, zero_truth=False)


@dataclass
class ComplexityReport:
    """Operation counts for recovering one length-n vector.

    The conventional solver multiplies by the measurement matrix twice per
    iteration; the propagation variant pays a one-time 6n^2 setup and then
    only additions per iteration.  ``ratio`` is proposed/conventional
    multiplies; a zero measurement count makes it unbounded.
    """

    n: int
    m: float
    iterations: int
    conventional_multiplies: float
    conventional_adds: float
    proposed_multiplies: float
    proposed_adds: float
    ratio: float
    ratio_unbounded: bool


def complexity_report(
    n: int, m_fraction: float = 0.25, iterations: int = 200
) -> ComplexityReport:
    if n < 1 or iterations < 1:
        raise ValueError("n and iterations must be positive")
    if not 0.0 <= m_fraction <= 1.0:
        raise ValueError(f"m_fraction must lie in [0, 1], got {m_fraction}")
    m = m_fraction * n
    conv_mult = 2.0 * m * n * iterations
    conv_add = m * (n - 1.0) + (2.0 * m * n - 2.0) * iterations
    prop_mult = 6.0 * n * n
    prop_add = 6.0 * n * (n - 1.0) + (m * n - 1.0) + (2.0 * m * n - 2.0) * iterations
    unbounded = m == 0.0
    ratio = math.inf if unbounded else prop_mult / conv_mult
    return ComplexityReport(
        n=n,
        m=m,
        iterations=iterations,
        conventional_multiplies=conv_mult,
        conventional_adds=conv_add,
        proposed_multiplies=prop_mult,
        proposed_adds=prop_add,
        ratio=ratio,
        ratio_unbounded=unbounded,
    )


@dataclass
class RateReport:
    total_bytes: int
    header_bytes: int
    layer_bytes: dict[str, int] = field(default_factory=dict)
    measured_samples: int = 0
    effective_measurements: int = 0
    measurement_fraction: float = 0.0
    bits_per_pixel: float = 0.0


def rate_report(data: bytes) -> RateReport:
    """Attribute every byte of a stream and tally the adaptive subrate."""
    summary = describe_stream(data)
    header = summary.header
    pixels = header.frame_count * header.width * header.height
    return RateReport(
        total_bytes=summary.total_bytes,
        header_bytes=_HEADER_SIZE,
        layer_bytes=dict(summary.layer_bytes),
        measured_samples=summary.measured_samples,
        effective_measurements=summary.effective_measurements,
        measurement_fraction=summary.measurement_fraction,
        bits_per_pixel=8.0 * summary.total_bytes / pixels,
    )


CURVE_FIELDS = ("experiment", "x", "series", "value")


def emit_curves(config: dict, path) -> int:
    """Run the experiment a config describes and write tidy CSV rows.

    An empty config writes just the header row.  Returns the row count.
    """
    rows = list(_curve_rows(config))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_FIELDS)
        writer.writerows(rows)
    return len(rows)


def _curve_rows(config: dict):
    if not config:
        return
    experiment = config.get("experiment")
    if experiment == "recovery_nmse":
        yield from _recovery_nmse_rows(config)
    else:
        raise ValueError(f"unknown experiment {experiment!r}")


def _recovery_nmse_rows(config: dict):
    """Per-iteration NMSE traces for each solver on one random sparse problem."""
    n = int(config.get("n", 1024))
    sparsity = int(config.get("sparsity", 82))
    iterations = int(config.get("iterations", 400))
    seed = int(config.get("seed", 7))
    algorithms = config.get("algorithms", ["eamp", "amp", "iht", "ist"])
    divisor = config.get("onsager_divisor", "n")

    codebook = SensingCodebook()
    entry = select_entry(sparsity)
    phi = codebook.matrix(entry, n)
    rng = np.random.default_rng(seed)
    truth = np.zeros(n)
    support = rng.choice(n, size=sparsity, replace=False)
    truth[support] = rng.normal(0.0, 1.0, size=sparsity)
    y = phi @ truth

    for algorithm in algorithms:
        # residual_tol=0 disables early exit so every series has `iterations` rows
        cfg = RecoveryConfig(
            algorithm=algorithm,
            iterations=iterations,
            onsager_divisor=divisor,
            residual_tol=0.0,
        )
        solver = make_solver(cfg, sparsity=sparsity)
        solver.fit(phi, y, truth=truth)
        for i, value in enumerate(solver.nmse_trace_, start=1):
            yield ("recovery_nmse", i, algorithm, float(value))
