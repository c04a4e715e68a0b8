"""Monte-Carlo harness: pursuit-vs-CoSaMP sweeps and phase diagrams.

Within a trial both algorithms consume the bit-identical observation, so
metric and timing differences isolate the algorithms themselves.  The
measurement matrix is generated once per (M, delta) cell and shared by
that cell's trials; signal and noise are regenerated per trial.  All
seeds derive deterministically from the master seed, so results do not
depend on worker count or scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import ensembles
from .cosamp import CosampParams, cosamp_recover
from .tgp import TgpParams, tgp_recover

_GENERATORS = {
    "gaussian": ensembles.gen_gaussian,
    "partial_fourier": ensembles.gen_partial_fourier,
}


@dataclass
class TrialRecord:
    """Metrics of one recovery on one instance."""

    algorithm: str
    ensemble: str
    n: int
    k: int
    m: int
    delta: float
    seed: int
    elapsed_seconds: float
    omega_size: int
    true_positives: int
    false_discoveries: int
    exact: bool
    noiseless_norm: float
    noise_norm: float
    stop_reason: str
    error: str | None = None


@dataclass
class SweepRow:
    """Per-(algorithm, M, delta) means over the cell's successful trials."""

    algorithm: str
    m: int
    delta: float
    trials: int
    mean_elapsed: float
    mean_true_positives: float
    mean_false_discoveries: float
    mean_omega_size: float
    failures: int


@dataclass
class SweepTable:
    ensemble: str
    n: int
    k: int
    tau: float
    trials: int
    seed: int
    rows: list[SweepRow]
    records: list[TrialRecord] = field(repr=False)


@dataclass
class PhaseGrid:
    """Exact-recovery success fractions over (sparsity, noise level)."""

    ensemble: str
    n: int
    k: int
    tau: float
    trials: int
    seed: int
    m_values: np.ndarray
    delta_values: np.ndarray
    success: np.ndarray  # shape (len(m_values), len(delta_values))
    overlay: np.ndarray  # theoretical noise ceiling sqrt(N)/sqrt(M log N) per M


def per_iteration_flops(n: int, k: int, nu: int) -> int:
    """Dominant flop count of one pursuit pass: ``(2 nu + 2) N K``.

    The additional O(K) thresholding sweep is excluded as subdominant.
    """
    if n < 1 or k < 1 or nu < 1:
        raise ValueError("n, k, nu must be positive")
    return (2 * nu + 2) * n * k


def phase_overlay(n: int, m: int) -> float:
    """Theoretical relative-noise ceiling ``sqrt(N) / sqrt(M log N)``."""
    return math.sqrt(n) / math.sqrt(m * math.log(n))


def _support_metrics(omega: np.ndarray, support: np.ndarray, m: int) -> tuple[int, int, bool]:
    tp = int(np.intersect1d(omega, support, assume_unique=True).size)
    fd = int(omega.size - tp)
    exact = fd == 0 and tp == m
    return tp, fd, exact


def _cell_matrix(ensemble: str, n: int, k: int, seed: int, mi: int, di: int):
    mseed = ensembles.derive_seed(seed, "cell-matrix", mi, di)
    return _GENERATORS[ensemble](n, k, mseed)


def _comparison_trial(
    a: ensembles.MeasurementMatrix,
    m: int,
    delta: float,
    tau: float,
    trial_seed: int,
    cg_tol: float,
) -> list[TrialRecord]:
    x = ensembles.gen_signal(a.k, m, ensembles.derive_seed(trial_seed, "trial-signal"))
    inst = ensembles.make_instance(a, x, delta, ensembles.derive_seed(trial_seed, "trial-noise"))
    common = dict(
        ensemble=a.ensemble, n=a.n, k=a.k, m=m, delta=delta, seed=trial_seed,
        noiseless_norm=inst.noiseless_norm, noise_norm=inst.noise_norm,
    )
    records = []
    for algorithm in ("tgp", "cosamp"):
        try:
            if algorithm == "tgp":
                res = tgp_recover(a, inst.b, TgpParams(tau=tau, cg_tol=cg_tol, record_trace=False))
            else:
                res = cosamp_recover(a, inst.b, CosampParams(sparsity_m=m, iterations=m, cg_tol=cg_tol))
            tp, fd, exact = _support_metrics(res.omega, x.support, m)
            records.append(TrialRecord(
                algorithm=algorithm, elapsed_seconds=res.elapsed,
                omega_size=int(res.omega.size), true_positives=tp,
                false_discoveries=fd, exact=exact, stop_reason=res.stop_reason,
                **common,
            ))
        except Exception as exc:  # failed trials become tagged rows, never abort a sweep
            records.append(TrialRecord(
                algorithm=algorithm, elapsed_seconds=0.0, omega_size=0,
                true_positives=0, false_discoveries=0, exact=False,
                stop_reason="error", error=f"{type(exc).__name__}: {exc}",
                **common,
            ))
    return records


def _map_trials(fn, args_list, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda args: fn(*args), args_list))
    return [fn(*args) for args in args_list]


def run_comparison(
    ensemble: str,
    n: int,
    k: int,
    m_range: Sequence[int],
    deltas: Sequence[float],
    tau: float,
    trials: int,
    seed: int,
    cg_tol: float = 1e-12,
    workers: int = 1,
) -> SweepTable:
    """Run both algorithms on identical data across (M, delta) cells.

    Per trial one instance is generated; the pursuit runs with the given
    ``tau`` and CoSaMP with ``sparsity_m = M, iterations = M``.  Means
    skip failed trials and the per-row failure count reports them.
    """
    if ensemble not in _GENERATORS:
        raise ValueError(f"unknown ensemble {ensemble!r}; choose from {sorted(_GENERATORS)}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    records: list[TrialRecord] = []
    rows: list[SweepRow] = []
    for mi, m in enumerate(m_range):
        for di, delta in enumerate(deltas):
            a = _cell_matrix(ensemble, n, k, seed, mi, di)
            args = [
                (a, m, delta, tau, ensembles.derive_seed(seed, "cell-trial", mi, di, t), cg_tol)
                for t in range(trials)
            ]
            cell = _map_trials(_comparison_trial, args, workers)
            flat = [rec for pair in cell for rec in pair]
            records.extend(flat)
            for algorithm in ("tgp", "cosamp"):
                rows.append(_aggregate(algorithm, m, delta, [r for r in flat if r.algorithm == algorithm]))
    return SweepTable(ensemble=ensemble, n=n, k=k, tau=tau, trials=trials, seed=seed,
                      rows=rows, records=records)


def _aggregate(algorithm: str, m: int, delta: float, recs: list[TrialRecord]) -> SweepRow:
    good = [r for r in recs if r.error is None]
    failures = len(recs) - len(good)

    def mean(vals):
        return float(np.mean(vals)) if vals else float("nan")

    return SweepRow(
        algorithm=algorithm,
        m=m,
        delta=delta,
        trials=len(good),
        mean_elapsed=mean([r.elapsed_seconds for r in good]),
        mean_true_positives=mean([r.true_positives for r in good]),
        mean_false_discoveries=mean([r.false_discoveries for r in good]),
        mean_omega_size=mean([r.omega_size for r in good]),
        failures=failures,
    )


def _phase_trial(
    a: ensembles.MeasurementMatrix, m: int, delta: float, tau: float, trial_seed: int, cg_tol: float
) -> bool:
    rng = ensembles.derive_rng(trial_seed, "phase-support")
    support = np.sort(rng.permutation(a.k)[:m])
    x = ensembles.SparseSignal(length=a.k, support=support,
                               values=np.ones(m, dtype=np.complex128))
    inst = ensembles.make_instance(a, x, delta, ensembles.derive_seed(trial_seed, "trial-noise"))
    try:
        res = tgp_recover(a, inst.b, TgpParams(tau=tau, cg_tol=cg_tol, record_trace=False))
    except Exception:
        return False
    _, _, exact = _support_metrics(res.omega, support, m)
    return exact


def run_phase_diagram(
    ensemble: str,
    n: int,
    k: int,
    m_range: Sequence[int],
    deltas: Sequence[float],
    tau: float,
    trials: int,
    seed: int,
    cg_tol: float = 1e-12,
    workers: int = 1,
) -> PhaseGrid:
    """Exact-recovery success fraction per (M, delta) cell.

    Signal values are fixed to 1 on a random support, so the noise axis
    is directly comparable to the overlay curve
    ``sqrt(N)/sqrt(M log N)``.
    """
    if ensemble not in _GENERATORS:
        raise ValueError(f"unknown ensemble {ensemble!r}; choose from {sorted(_GENERATORS)}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    m_values = np.asarray(list(m_range), dtype=np.int64)
    delta_values = np.asarray(list(deltas), dtype=np.float64)
    success = np.zeros((m_values.size, delta_values.size))
    for mi, m in enumerate(m_values):
        for di, delta in enumerate(delta_values):
            a = _cell_matrix(ensemble, n, k, seed, mi, di)
            args = [
                (a, int(m), float(delta), tau,
                 ensembles.derive_seed(seed, "cell-trial", mi, di, t), cg_tol)
                for t in range(trials)
            ]
            outcomes = _map_trials(_phase_trial, args, workers)
            success[mi, di] = sum(outcomes) / trials
    overlay = np.asarray([phase_overlay(n, int(m)) for m in m_values])
    return PhaseGrid(ensemble=ensemble, n=n, k=k, tau=tau, trials=trials, seed=seed,
                     m_values=m_values, delta_values=delta_values,
                     success=success, overlay=overlay)


# ---------------------------------------------------------------------------
# CSV emission


def _write_lines(path, lines: list[str]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


SWEEP_HEADER = ("algorithm,ensemble,N,K,M,delta,trials,mean_elapsed_s,"
                "mean_true_positives,mean_false_discoveries,mean_omega_size,failures")


def emit_sweep_csv(table: SweepTable, path) -> None:
    lines = [
        f"# ensemble={table.ensemble}",
        f"# n={table.n}",
        f"# k={table.k}",
        f"# tau={table.tau:.6g}",
        f"# trials={table.trials}",
        f"# seed={table.seed}",
        SWEEP_HEADER,
    ]
    for r in table.rows:
        lines.append(
            f"{r.algorithm},{table.ensemble},{table.n},{table.k},{r.m},{r.delta:.6g},"
            f"{r.trials},{r.mean_elapsed:.6g},{r.mean_true_positives:.6g},"
            f"{r.mean_false_discoveries:.6g},{r.mean_omega_size:.6g},{r.failures}"
        )
    _write_lines(path, lines)


PHASE_HEADER = "M,delta,success_rate,overlay"


def emit_phase_csv(grid: PhaseGrid, path) -> None:
    lines = [
        f"# ensemble={grid.ensemble}",
        f"# n={grid.n}",
        f"# k={grid.k}",
        f"# tau={grid.tau:.6g}",
        f"# trials={grid.trials}",
        f"# seed={grid.seed}",
        PHASE_HEADER,
    ]
    for mi, m in enumerate(grid.m_values):
        for di, delta in enumerate(grid.delta_values):
            lines.append(
                f"{int(m)},{delta:.6g},{grid.success[mi, di]:.6g},{grid.overlay[mi]:.6g}"
            )
    _write_lines(path, lines)


TRIALS_HEADER = ("algorithm,ensemble,N,K,M,delta,seed,elapsed_s,omega_size,"
                 "true_positives,false_discoveries,exact,noiseless_norm,noise_norm,"
                 "stop_reason,error")


def emit_trials_csv(table: SweepTable, path) -> None:
    """Raw per-trial rows, one TrialRecord each."""
    lines = [TRIALS_HEADER]
    for r in table.records:
        lines.append(
            f"{r.algorithm},{r.ensemble},{r.n},{r.k},{r.m},{r.delta:.6g},{r.seed},"
            f"{r.elapsed_seconds:.6g},{r.omega_size},{r.true_positives},"
            f"{r.false_discoveries},{int(r.exact)},{r.noiseless_norm:.6g},"
            f"{r.noise_norm:.6g},{r.stop_reason},{r.error or ''}"
        )
    _write_lines(path, lines)
