"""Sparse recovery of measured vectors.

Four solvers share one iteration core, differing only in which update rule
runs when:

* ``EampRecovery`` -- two-phase solver: a soft-threshold phase with an Onsager
  correction term warms up the estimate, then a known-sparsity hard-threshold
  phase refines it.  This is the decoder's default.
* ``AmpRecovery``  -- the soft-threshold phase for every iteration.
* ``IhtRecovery``  -- the hard-threshold phase from the start.
* ``IstRecovery``  -- soft thresholding without the Onsager term.

The soft threshold at each step is the m-th largest entry of |s + c*Phi'z|
(m = measurement count), so the shrinkage adapts to the iterate rather than
to a tuned constant.  The step scale c defaults to 1/n, which keeps the
un-normalized +/-1 measurement matrices from diverging; the Onsager term
adds z * count / n to the fresh residual, with ``count`` the number of
entries strictly above threshold (``onsager_divisor="m"`` switches the
denominator).

Estimators follow the usual fit/get_params conventions: hyper-parameters in
``__init__``, data in ``fit(X, y)``, learned state in trailing-underscore
attributes (``coef_``, ``n_iter_``, ``residual_norm_``, ``converged_``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array

from .errors import BitstreamError
from .geometry import SubbandPyramid
from .sensing import (
    DEFAULT_TARGET_MIN_N,
    MeasurementRecord,
    SensingCodebook,
    band_vector_counts,
    devectorize_band,
)

DEFAULT_ITERATIONS = 400
DEFAULT_PHASE1_FRACTION = 0.25
DEFAULT_RESIDUAL_TOL = 1e-12

ALGORITHMS = ("eamp", "amp", "iht", "ist")


def _soft_threshold_step(gamma: np.ndarray, m: int) -> tuple[np.ndarray, int]:
    mag = np.abs(gamma)
    # m-th largest magnitude, duplicates included; degenerates to 0 when the
    # iterate has fewer than m nonzero entries, making the step an identity
    delta = np.partition(mag, mag.size - m)[mag.size - m]
    shrunk = np.sign(gamma) * np.maximum(mag - delta, 0.0)
    above = int(np.count_nonzero(mag > delta))
    return shrunk, above


def _keep_top_k(s: np.ndarray, k: int) -> np.ndarray:
    # stable sort, so ties keep the lower index
    keep = np.argsort(-np.abs(s), kind="stable")[:k]
    out = np.zeros_like(s)
    out[keep] = s[keep]
    return out


def _recover(
    phi: np.ndarray,
    y: np.ndarray,
    *,
    iterations: int,
    phase1_iters: int,
    sparsity: int | None,
    step_scale: float | None,
    onsager: bool,
    onsager_divisor: str,
    residual_tol: float,
    truth: np.ndarray | None = None,
):
    m, n = phi.shape
    c = (1.0 / n) if step_scale is None else float(step_scale)
    s = np.zeros(n)
    z = np.asarray(y, dtype=np.float64).copy()
    trace: list[float] | None = [] if truth is not None else None
    truth_energy = float(truth @ truth) if truth is not None else 0.0

    iterations_run = 0
    converged = False
    for it in range(iterations):
        iterations_run = it + 1
        if it < phase1_iters:
            gamma = s + c * (phi.T @ z)
            s, above = _soft_threshold_step(gamma, m)
            fresh = y - phi @ s
            if onsager:
                divisor = n if onsager_divisor == "n" else m
                z = fresh + z * (above / divisor)
            else:
                z = fresh
        else:
            s = s + c * (phi.T @ z)
            s = _keep_top_k(s, sparsity)
            z = y - phi @ s
        if trace is not None:
            err = s - truth
            sq = float(err @ err)
            trace.append(sq / truth_energy if truth_energy else sq)
        if float(np.linalg.norm(z)) < residual_tol:
            converged = True
            break
    return s, float(np.linalg.norm(z)), iterations_run, converged, trace


class _IterativeRecovery(BaseEstimator):
    """Shared fit machinery; subclasses pin the phase schedule."""

    def _plan(self, n_iter: int) -> tuple[int, bool, str, int | None]:
        """Returns (phase1_iters, onsager, divisor, sparsity)."""
        raise NotImplementedError

    def fit(self, X, y, truth=None):
        """Recover a sparse vector from measurements ``y = X @ s``.

        ``truth`` (optional) enables the per-iteration error trace
        ``nmse_trace_`` for experiment harnesses.
        """
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise ValueError(
                f"y has {y.shape[0]} entries but the matrix has {X.shape[0]} rows"
            )
        if self.iterations < 4:
            raise ValueError("iterations must be at least 4")
        phase1_iters, onsager, divisor, sparsity = self._plan(self.iterations)
        if divisor not in ("n", "m"):
            raise ValueError(f"onsager_divisor must be 'n' or 'm', got {divisor!r}")
        s, residual, n_iter, converged, trace = _recover(
            X,
            y,
            iterations=self.iterations,
            phase1_iters=phase1_iters,
            sparsity=sparsity,
            step_scale=self.step_scale,
            onsager=onsager,
            onsager_divisor=divisor,
            residual_tol=self.residual_tol,
            truth=None if truth is None else np.asarray(truth, dtype=np.float64),
        )
        self.coef_ = s
        self.residual_norm_ = residual
        self.n_iter_ = n_iter
        self.converged_ = converged
        self.nmse_trace_ = None if trace is None else np.asarray(trace)
        return self

    def predict(self, X):
        """Re-project the recovered coefficients: X @ coef_."""
        X = check_array(X, dtype=np.float64)
        return X @ self.coef_


class EampRecovery(_IterativeRecovery):
    """Two-phase solver: Onsager-corrected soft thresholding, then top-k refinement.

    ``sparsity`` is the transmitted exact nonzero count of the vector being
    recovered; the second phase trims the iterate to its k largest entries
    every step.  ``phase1_fraction=1`` makes the run identical to
    :class:`AmpRecovery`.
    """

    def __init__(
        self,
        sparsity: int | None = None,
        iterations: int = DEFAULT_ITERATIONS,
        phase1_fraction: float = DEFAULT_PHASE1_FRACTION,
        step_scale: float | None = None,
        onsager_divisor: str = "n",
        residual_tol: float = DEFAULT_RESIDUAL_TOL,
    ):
        self.sparsity = sparsity
        self.iterations = iterations
        self.phase1_fraction = phase1_fraction
        self.step_scale = step_scale
        self.onsager_divisor = onsager_divisor
        self.residual_tol = residual_tol

    def _plan(self, n_iter):
        if not 0.0 < self.phase1_fraction <= 1.0:
            raise ValueError("phase1_fraction must lie in (0, 1]")
        phase1 = min(n_iter, math.ceil(n_iter * self.phase1_fraction))
        if phase1 < n_iter and self.sparsity is None:
            raise ValueError("sparsity is required for the hard-threshold phase")
        return phase1, True, self.onsager_divisor, self.sparsity


class AmpRecovery(_IterativeRecovery):
    """Soft-threshold phase with the Onsager correction for every iteration."""

    def __init__(
        self,
        iterations: int = DEFAULT_ITERATIONS,
        step_scale: float | None = None,
        onsager_divisor: str = "n",
        residual_tol: float = DEFAULT_RESIDUAL_TOL,
    ):
        self.iterations = iterations
        self.step_scale = step_scale
        self.onsager_divisor = onsager_divisor
        self.residual_tol = residual_tol

    def _plan(self, n_iter):
        return n_iter, True, self.onsager_divisor, None


class IhtRecovery(_IterativeRecovery):
    """Hard-threshold (top-k) updates from the very first iteration."""

    def __init__(
        self,
        sparsity: int | None = None,
        iterations: int = DEFAULT_ITERATIONS,
        step_scale: float | None = None,
        residual_tol: float = DEFAULT_RESIDUAL_TOL,
    ):
        self.sparsity = sparsity
        self.iterations = iterations
        self.step_scale = step_scale
        self.residual_tol = residual_tol

    def _plan(self, n_iter):
        if self.sparsity is None:
            raise ValueError("sparsity is required for hard thresholding")
        return 0, False, "n", self.sparsity


class IstRecovery(_IterativeRecovery):
    """Plain iterative soft thresholding; same threshold rule, no Onsager term."""

    def __init__(
        self,
        iterations: int = DEFAULT_ITERATIONS,
        step_scale: float | None = None,
        ist_threshold_schedule: str = "mth-largest",
        residual_tol: float = DEFAULT_RESIDUAL_TOL,
    ):
        self.iterations = iterations
        self.step_scale = step_scale
        self.ist_threshold_schedule = ist_threshold_schedule
        self.residual_tol = residual_tol

    def _plan(self, n_iter):
        if self.ist_threshold_schedule != "mth-largest":
            raise ValueError(
                f"unsupported threshold schedule {self.ist_threshold_schedule!r}"
            )
        return n_iter, False, "n", None


@dataclass
class RecoveryConfig:
    """Decoder-side solver settings shared by every record."""

    algorithm: str = "eamp"
    iterations: int = DEFAULT_ITERATIONS
    phase1_fraction: float = DEFAULT_PHASE1_FRACTION
    step_scale: float | None = None
    onsager_divisor: str = "n"
    ist_threshold_schedule: str = "mth-largest"
    residual_tol: float = DEFAULT_RESIDUAL_TOL


@dataclass
class RecoveryResult:
    s_hat: np.ndarray
    residual_norm: float
    iterations_run: int
    converged: bool
    nmse_trace: np.ndarray | None = None


def make_solver(config: RecoveryConfig, sparsity: int | None = None) -> _IterativeRecovery:
    """Instantiate the estimator a :class:`RecoveryConfig` describes."""
    if config.algorithm == "eamp":
        return EampRecovery(
            sparsity=sparsity,
            iterations=config.iterations,
            phase1_fraction=config.phase1_fraction,
            step_scale=config.step_scale,
            onsager_divisor=config.onsager_divisor,
            residual_tol=config.residual_tol,
        )
    if config.algorithm == "amp":
        return AmpRecovery(
            iterations=config.iterations,
            step_scale=config.step_scale,
            onsager_divisor=config.onsager_divisor,
            residual_tol=config.residual_tol,
        )
    if config.algorithm == "iht":
        return IhtRecovery(
            sparsity=sparsity,
            iterations=config.iterations,
            step_scale=config.step_scale,
            residual_tol=config.residual_tol,
        )
    if config.algorithm == "ist":
        return IstRecovery(
            iterations=config.iterations,
            step_scale=config.step_scale,
            ist_threshold_schedule=config.ist_threshold_schedule,
            residual_tol=config.residual_tol,
        )
    raise ValueError(f"unknown algorithm {config.algorithm!r}, expected one of {ALGORITHMS}")


def recover_record(
    record: MeasurementRecord,
    codebook: SensingCodebook,
    config: RecoveryConfig | None = None,
    truth: np.ndarray | None = None,
) -> RecoveryResult:
    """Recover one vector; zero-sparsity and raw-fallback records shortcut."""
    config = config or RecoveryConfig()
    if record.entry == 0:
        return RecoveryResult(np.zeros(record.n), 0.0, 0, True)
    if record.raw_fallback:
        return RecoveryResult(np.asarray(record.y, dtype=np.float64).copy(), 0.0, 0, True)
    phi = codebook.matrix(record.entry, record.n)
    est = make_solver(config, sparsity=record.sparsity)
    est.fit(phi, record.y, truth=truth)
    return RecoveryResult(
        est.coef_, est.residual_norm_, est.n_iter_, est.converged_, est.nmse_trace_
    )


def recover_pyramid(
    base_band: np.ndarray,
    records: list[MeasurementRecord],
    width: int,
    height: int,
    codebook: SensingCodebook,
    config: RecoveryConfig | None = None,
    target_min_n: int = DEFAULT_TARGET_MIN_N,
) -> SubbandPyramid:
    """Rebuild a coefficient pyramid from the base band plus measured records.

    Records must arrive in transmission order and cover every measured band
    exactly; mismatches raise :class:`BitstreamError`.
    """
    pyramid = SubbandPyramid.zeros(width, height)
    pyramid.base_band[:] = base_band
    it = iter(records)
    consumed = 0
    for band, n, count in band_vector_counts(width, height, target_min_n):
        vectors = np.zeros((count, n))
        for idx in range(count):
            try:
                record = next(it)
            except StopIteration:
                raise BitstreamError(
                    f"record stream ended after {consumed} records; "
                    f"band {band} vector {idx} is missing"
                ) from None
            consumed += 1
            if record.n != n:
                raise BitstreamError(
                    f"record {consumed} carries n={record.n}, geometry expects {n}"
                )
            vectors[idx] = recover_record(record, codebook, config).s_hat
        pyramid.region(band)[:] = devectorize_band(vectors, band.height, band.width)
    if next(it, None) is not None:
        raise BitstreamError(f"trailing records beyond the {consumed} the geometry defines")
    return pyramid
