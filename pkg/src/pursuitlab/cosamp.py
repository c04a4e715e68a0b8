"""CoSaMP baseline sharing the same linear-algebra path as the pursuit loop.

Pinned variant: per iteration, select the 2M largest proxy magnitudes,
merge with the current support, least-squares fit on the merged set,
prune to the M largest fitted coefficients, and update the residual with
the pruned fit.  Ties in any top-k selection break toward the lowest
index, which keeps runs deterministic and testable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .ensembles import MeasurementMatrix
from .linalg import _solve_on_columns
from .tgp import RecoveryResult


@dataclass
class CosampParams:
    sparsity_m: int
    iterations: int
    cg_tol: float = 1e-12

    def __post_init__(self):
        if self.sparsity_m < 1:
            raise ValueError("sparsity_m must be at least 1")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.cg_tol <= 0:
            raise ValueError("cg_tol must be positive")


def _top_k(mags: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest magnitudes, ties to the lowest index,
    exact zeros excluded."""
    order = np.argsort(-mags, kind="stable")[:k]
    return order[mags[order] > 0.0]


def cosamp_recover(
    a: MeasurementMatrix, b: np.ndarray, params: CosampParams
) -> RecoveryResult:
    """Recover an (at most) M-sparse approximation of ``b``.

    Runs ``params.iterations`` rounds, stopping early once the residual
    falls to ``cg_tol * ||b||``.  With zero iterations the result is the
    empty support.
    """
    t0 = time.perf_counter()
    mat = a.matrix
    n, k = mat.shape
    b = np.asarray(b, dtype=np.complex128)
    if b.shape != (n,):
        raise ValueError(f"b has shape {b.shape}, expected ({n},)")
    m = params.sparsity_m
    if 3 * m > n:
        raise ValueError(f"need 3M <= N for the merged fit, got M={m}, N={n}")

    empty = np.zeros(0, dtype=np.int64)
    b_norm0 = float(np.linalg.norm(b))
    if b_norm0 == 0.0:
        return RecoveryResult(empty, np.zeros(0, np.complex128), "zero_residual",
                              0, time.perf_counter() - t0)

    omega = empty
    coefficients = np.zeros(0, dtype=np.complex128)
    resid = b.copy()
    stop_reason = "iter_cap"
    iterations = 0

    for _ in range(params.iterations):
        iterations += 1
        proxy = mat.conj().T @ resid
        candidates = _top_k(np.abs(proxy), 2 * m)
        merged = np.union1d(omega, candidates)
        fit, _, _ = _solve_on_columns(mat, merged, b, params.cg_tol)
        keep = _top_k(np.abs(fit), m)
        keep_sorted = np.sort(keep)
        omega = merged[keep_sorted]
        coefficients = fit[keep_sorted]
        resid = b - mat[:, omega] @ coefficients
        if float(np.linalg.norm(resid)) <= params.cg_tol * b_norm0:
            stop_reason = "zero_residual"
            break

    return RecoveryResult(
        omega=omega,
        coefficients=coefficients,
        stop_reason=stop_reason,
        iterations=iterations,
        elapsed=time.perf_counter() - t0,
    )
