"""Dense complex linear-algebra primitives.

Vectors and matrices are plain numpy ``complex128`` arrays; matrices are
kept in column-major (Fortran) order so gathering a subset of columns is
contiguous.  Everything here is pure with respect to its inputs and safe
to call concurrently.

The central routine is a conjugate-gradient solve of the normal equations
restricted to a set of columns, used both for orthogonal-complement
projection and for least-squares coefficient fits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import RankDeficiencyError


@dataclass
class CgReport:
    """Outcome of one conjugate-gradient solve."""

    iterations: int
    final_relative_residual: float
    converged: bool


def inner(u: np.ndarray, v: np.ndarray) -> complex:
    """Complex inner product, conjugate-linear in the first argument.

    ``inner(u, u)`` is real and equals the squared Euclidean norm of ``u``.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    return complex(np.vdot(u, v))


def norm2(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def as_index_set(indices, k: int | None = None) -> np.ndarray:
    """Validate and canonicalize a set of column indices.

    Returns a sorted ``int64`` array with no duplicates.  If ``k`` is given,
    indices must lie in ``[0, k)``.
    """
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size:
        idx = np.sort(idx)
        if np.any(idx[1:] == idx[:-1]):
            raise ValueError("duplicate indices in index set")
        if idx[0] < 0:
            raise ValueError("negative index in index set")
        if k is not None and idx[-1] >= k:
            raise ValueError(f"index {int(idx[-1])} out of range [0, {k})")
    return idx


def cg_solve(
    gram_apply: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, CgReport]:
    """Conjugate gradients for a Hermitian positive-definite operator.

    Parameters
    ----------
    gram_apply : callable
        Applies the operator to a coefficient vector.
    rhs : ndarray
        Right-hand side.
    tol : float
        Relative residual target, ``||gram_apply(y) - rhs|| <= tol * ||rhs||``.
    max_iter : int
        Iteration cap.  Non-convergence is flagged in the report, not fatal.

    Returns
    -------
    (y, report)
        The solution (best iterate on non-convergence) and a `CgReport`
        whose ``iterations`` is the achieved iteration count.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rhs = np.asarray(rhs, dtype=np.complex128)
    rhs_norm = np.linalg.norm(rhs)
    x = np.zeros_like(rhs)
    if rhs_norm == 0.0:
        return x, CgReport(iterations=0, final_relative_residual=0.0, converged=True)

    r = rhs.copy()
    p = r.copy()
    rs = float(np.real(np.vdot(r, r)))
    iterations = 0
    converged = False
    for _ in range(max_iter):
        ap = gram_apply(p)
        denom = float(np.real(np.vdot(p, ap)))
        if denom <= 0.0:
            # operator not positive definite on this subspace
            break
        alpha = rs / denom
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.real(np.vdot(r, r)))
        iterations += 1
        if np.sqrt(rs_new) <= tol * rhs_norm:
            # recurrence residual can drift; confirm against the true one
            r_true = rhs - gram_apply(x)
            rs_new = float(np.real(np.vdot(r_true, r_true)))
            if np.sqrt(rs_new) <= tol * rhs_norm:
                r = r_true
                converged = True
                break
            r = r_true
            p = r.copy()
            rs = rs_new
            continue
        beta = rs_new / rs
        p = r + beta * p
        rs = rs_new

    rel = float(np.linalg.norm(r) / rhs_norm)
    return x, CgReport(iterations=iterations, final_relative_residual=rel, converged=converged)


def _gather(a: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Contiguous copy of the selected columns."""
    return np.asfortranarray(a[:, omega])


def _solve_on_columns(
    a: np.ndarray, omega: np.ndarray, b: np.ndarray, tol: float
) -> tuple[np.ndarray, np.ndarray, CgReport]:
    """Solve the normal equations on the columns in ``omega``.

    Returns ``(coefficients, a_omega, report)``.  Raises
    `RankDeficiencyError` if CG does not converge, reporting the smallest
    Gram eigenvalue as supporting evidence.
    """
    a_om = _gather(a, omega)
    rhs = a_om.conj().T @ b
    max_iter = max(50, 4 * omega.size)
    y, report = cg_solve(lambda p: a_om.conj().T @ (a_om @ p), rhs, tol, max_iter)
    if not report.converged:
        lo, _ = gram_extreme_eigs_matrix(a_om.conj().T @ a_om)
        raise RankDeficiencyError(
            omega,
            f"CG stalled at relative residual {report.final_relative_residual:.3e} "
            f"after {report.iterations} iterations (smallest Gram eigenvalue {lo:.3e})",
        )
    return y, a_om, report


def complement_project(
    a: np.ndarray, omega: np.ndarray, b: np.ndarray, tol: float = 1e-12
) -> tuple[np.ndarray, CgReport]:
    """Project ``b`` onto the orthogonal complement of the selected columns.

    Computes ``b - A_omega pinv(A_omega) b`` via CG on the normal
    equations followed by a single matrix apply.  With an empty ``omega``
    the input is returned unchanged with a zero-iteration report.
    """
    omega = as_index_set(omega, a.shape[1])
    if omega.size == 0:
        return np.array(b, dtype=np.complex128, copy=True), CgReport(0, 0.0, True)
    if omega.size > a.shape[0]:
        raise RankDeficiencyError(omega, f"more columns than rows ({a.shape[0]})")
    y, a_om, report = _solve_on_columns(a, omega, b, tol)
    return b - a_om @ y, report


def least_squares_fit(
    a: np.ndarray, omega: np.ndarray, b: np.ndarray, tol: float = 1e-12
) -> np.ndarray:
    """Coefficients minimizing ``||A_omega c - b||_2`` over the selected columns."""
    omega = as_index_set(omega, a.shape[1])
    if omega.size == 0:
        return np.zeros(0, dtype=np.complex128)
    if omega.size > a.shape[0]:
        raise RankDeficiencyError(omega, f"more columns than rows ({a.shape[0]})")
    y, _, _ = _solve_on_columns(a, omega, b, tol)
    return y


def gram_extreme_eigs(a: np.ndarray, omega: np.ndarray) -> tuple[float, float]:
    """Extreme eigenvalues of the Gram matrix of the selected columns.

    Uses power iteration for the largest and inverse power iteration for
    the smallest eigenvalue, to about 1e-6 relative accuracy.
    """
    omega = as_index_set(omega, a.shape[1])
    if omega.size == 0:
        raise ValueError("omega must contain at least one index")
    a_om = _gather(a, omega)
    g = a_om.conj().T @ a_om
    return gram_extreme_eigs_matrix(g)


def gram_extreme_eigs_matrix(g: np.ndarray) -> tuple[float, float]:
    """Extreme eigenvalues of an explicit Hermitian PSD matrix."""
    g = 0.5 * (g + g.conj().T)
    hi = _power_iteration(g)
    try:
        g_inv = np.linalg.inv(g)
    except np.linalg.LinAlgError:
        return 0.0, hi
    inv_hi = _power_iteration(0.5 * (g_inv + g_inv.conj().T))
    lo = 1.0 / inv_hi if inv_hi > 0 else 0.0
    return lo, hi


def _power_iteration(g: np.ndarray, tol: float = 1e-7, max_iter: int = 10_000) -> float:
    m = g.shape[0]
    # deterministic generic start direction
    v = np.linspace(1.0, 2.0, m).astype(np.complex128)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = g @ v
        lam_new = float(np.real(np.vdot(v, w)))
        wn = np.linalg.norm(w)
        if wn == 0.0:
            return 0.0
        v = w / wn
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    return lam
