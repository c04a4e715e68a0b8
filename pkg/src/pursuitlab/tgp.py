"""Thresholding greedy pursuit and its closed-form parameter choices.

The recovery loop alternates a normalized correlation proxy, a hard
threshold that keeps only entries strictly above ``tau``, support
merging, and projection of the observation onto the orthogonal
complement of the detected columns.  Reported coefficients always come
from the least-squares fit on the final support.

Logarithms are natural throughout: the tail bounds behind these
formulas are of the form ``exp(-t^2 / 2)``, which is consistent only
with base e.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .ensembles import MeasurementMatrix
from .errors import RankDeficiencyError
from .linalg import _solve_on_columns


@dataclass
class TgpParams:
    """Knobs for one recovery run.

    ``tau`` must lie in (0, 1): proxy entries are normalized, so their
    magnitudes never exceed 1 and a threshold of 1 can detect nothing.
    ``max_outer_iters`` defaults to min(N, K), which guarantees
    termination even far outside the theory's assumptions.
    """

    tau: float
    cg_tol: float = 1e-12
    max_outer_iters: int | None = None
    record_trace: bool = True

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must be in (0, 1), got {self.tau}")
        if self.cg_tol <= 0:
            raise ValueError("cg_tol must be positive")
        if self.max_outer_iters is not None and self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")


@dataclass
class IterationStep:
    """One pass of the loop: what the proxy saw and what the projection left."""

    proxy_max: float
    new_indices: np.ndarray
    residual_norm: float
    cg_iterations: int


@dataclass
class RecoveryResult:
    omega: np.ndarray  # sorted detected column indices
    coefficients: np.ndarray  # least-squares fit over omega
    stop_reason: str  # empty_threshold | zero_residual | iter_cap
    iterations: int  # completed loop passes (proxy evaluations)
    elapsed: float  # seconds, monotonic clock
    trace: list[IterationStep] | None = field(default=None, repr=False)


def threshold(v: np.ndarray, tau: float) -> np.ndarray:
    """Elementwise ``max(|v| - tau, 0)``.

    The output is real and nonnegative; an entry survives (is nonzero)
    exactly when its magnitude is strictly above ``tau``.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return np.maximum(np.abs(v) - tau, 0.0)


def tgp_recover(
    a: MeasurementMatrix, b: np.ndarray, params: TgpParams
) -> RecoveryResult:
    """Run thresholding greedy pursuit on one observation.

    Each pass computes the proxy ``A* r / ||r||``, keeps indices whose
    proxy magnitude strictly exceeds ``tau``, merges them into the
    support, and re-projects the original ``b`` onto the complement of
    the detected columns.  The loop stops when a pass detects nothing
    new, when the residual norm falls to ``cg_tol * ||b||``, or at the
    iteration cap.

    A pass that detects only already-known indices also stops the loop:
    after projection those proxies are zero up to solver tolerance, so
    in exact arithmetic this coincides with detecting nothing at all.
    """
    t0 = time.perf_counter()
    mat = a.matrix
    n, k = mat.shape
    b = np.asarray(b, dtype=np.complex128)
    if b.shape != (n,):
        raise ValueError(f"b has shape {b.shape}, expected ({n},)")
    max_outer = params.max_outer_iters if params.max_outer_iters is not None else min(n, k)
    trace: list[IterationStep] | None = [] if params.record_trace else None

    b_norm0 = float(np.linalg.norm(b))
    empty = np.zeros(0, dtype=np.int64)
    if b_norm0 == 0.0:
        return RecoveryResult(empty, np.zeros(0, np.complex128), "zero_residual",
                              0, time.perf_counter() - t0, trace)

    omega = empty
    coefficients = np.zeros(0, dtype=np.complex128)
    resid = b
    resid_norm = b_norm0
    stop_reason = "iter_cap"
    iterations = 0

    for _ in range(max_outer):
        iterations += 1
        proxy = (mat.conj().T @ resid) / resid_norm
        mags = np.abs(proxy)
        detected = np.flatnonzero(mags > params.tau)
        new = np.setdiff1d(detected, omega, assume_unique=True)
        if new.size == 0:
            stop_reason = "empty_threshold"
            if trace is not None:
                trace.append(IterationStep(float(mags.max()), new, resid_norm, 0))
            break
        omega = np.union1d(omega, new)
        if omega.size > n:
            raise RankDeficiencyError(
                omega, f"support grew past the row count {n}; projection undefined"
            )
        coefficients, a_om, report = _solve_on_columns(mat, omega, b, params.cg_tol)
        resid = b - a_om @ coefficients
        resid_norm = float(np.linalg.norm(resid))
        if trace is not None:
            trace.append(IterationStep(float(mags.max()), new, resid_norm, report.iterations))
        if resid_norm <= params.cg_tol * b_norm0:
            stop_reason = "zero_residual"
            break

    return RecoveryResult(
        omega=omega,
        coefficients=coefficients,
        stop_reason=stop_reason,
        iterations=iterations,
        elapsed=time.perf_counter() - t0,
        trace=trace,
    )


# ---------------------------------------------------------------------------
# closed-form parameter choices


def noise_floor_constant(gamma: float, kappa: float) -> float:
    """Constant ``sqrt(2 (gamma + kappa))`` scaling the pure-noise threshold.

    ``gamma`` relates signal length to measurement count (K = N^gamma);
    ``kappa`` sets the failure probability 2 / N^kappa.
    """
    if gamma < 1:
        raise ValueError("gamma must be at least 1")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return math.sqrt(2.0 * (gamma + kappa))


def tau_floor(n: int, gamma: float, kappa: float) -> float:
    """Smallest threshold guaranteed to reject pure noise.

    Returns ``c0 sqrt(log N) / sqrt(N)`` with natural log; above this
    value the output on noise-only input is empty with probability
    1 - 2/N^kappa.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    c0 = noise_floor_constant(gamma, kappa)
    return c0 * math.sqrt(math.log(n)) / math.sqrt(n)


def tau_exact_recovery(mu: float, n: int, gamma: float, kappa: float) -> float:
    """Threshold choice guaranteeing exact support recovery.

    ``sqrt((4/3) (mu/4 + c0^2 log(N) / N))`` with natural log, where
    ``mu`` is the mutual coherence of the measurement matrix.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError("mu must lie in [0, 1]")
    if n < 2:
        raise ValueError("n must be at least 2")
    c0 = noise_floor_constant(gamma, kappa)
    return math.sqrt((4.0 / 3.0) * (mu / 4.0 + c0 * c0 * math.log(n) / n))


def sparsity_cap(mu: float, n: int, gamma: float, kappa: float) -> int:
    """Largest admissible sparsity: ``floor(min(1/(4 mu), sqrt(N)/(4 c0 sqrt(log N))))``.

    With ``mu == 0`` only the second bound applies.  A tiny epsilon is
    added before flooring so values like 1/(4 mu) with mu = 1/(4M) land
    on M despite binary rounding.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if n < 2:
        raise ValueError("n must be at least 2")
    c0 = noise_floor_constant(gamma, kappa)
    geom = math.sqrt(n) / (4.0 * c0 * math.sqrt(math.log(n)))
    bound = geom if mu == 0.0 else min(1.0 / (4.0 * mu), geom)
    return int(math.floor(bound + 1e-9))


def noise_tolerance(m: int, tau: float) -> float:
    """Noise-to-signal margin for guaranteed exact recovery.

    Returns ``f(M, tau) = F / G`` with

        F = (2/3) sqrt((1 - tau^2)/tau^2)
            - (sqrt(5M/4 - 7/4 + 1/(2M)) + sqrt(M/12))
        G = (4/3) sqrt(1 - tau^2) + 1.

    Exact recovery is guaranteed whenever ``||e|| <= f * min |x_i|`` over
    the support.  Requires ``0 < tau <= 1/sqrt(6M)``, the range on which
    F is positive.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    tau_max = 1.0 / math.sqrt(6.0 * m)
    if not 0.0 < tau <= tau_max:
        raise ValueError(
            f"tau={tau} outside the admissible interval (0, {tau_max:.6g}] for m={m}"
        )
    f_term = (2.0 / 3.0) * math.sqrt((1.0 - tau * tau) / (tau * tau))
    spread = math.sqrt(1.25 * m - 1.75 + 0.5 / m) + math.sqrt(m / 12.0)
    f_num = f_term - spread
    g_den = (4.0 / 3.0) * math.sqrt(1.0 - tau * tau) + 1.0
    return f_num / g_den
