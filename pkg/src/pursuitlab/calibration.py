"""Empirical threshold calibration on pure-noise input.

Scans a tau grid from 0 upward; at each grid point it runs independent
pure-noise trials (fresh matrix and fresh unit-sphere observation per
trial) and records the fraction of trials on which the pursuit returns
the empty set.  The calibrated value ``tau_star`` is the start of the
first sustained run of rate-1 grid points.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import ensembles
from .tgp import tau_floor

# grid points of uninterrupted rate 1 required before declaring tau_star;
# a shorter all-1 run that reaches the scan ceiling also counts.
SUSTAIN_POINTS = 10

_GENERATORS = {
    "gaussian": ensembles.gen_gaussian,
    "partial_fourier": ensembles.gen_partial_fourier,
}


@dataclass
class CalibrationReport:
    tau_grid: np.ndarray
    success_rate: np.ndarray
    tau_star: float | None
    trials_per_point: int
    ensemble: str
    n: int
    k: int
    seed: int
    grid_step: float
    diagnostic: str | None = None


def _pure_noise_empty(a: ensembles.MeasurementMatrix, b: np.ndarray, tau: float) -> bool:
    """Whether the pursuit output on ``b`` is empty.

    The support only ever grows, so the output is empty exactly when the
    first thresholding pass detects nothing, i.e. when no normalized
    proxy magnitude strictly exceeds ``tau``.  Checking that directly
    avoids projecting onto the huge supports a sub-threshold tau drags
    in.  Equivalence with the full recovery loop is covered by tests.
    """
    proxy = a.matrix.conj().T @ b
    scale = float(np.linalg.norm(b))
    return not bool(np.any(np.abs(proxy) > tau * scale))


def _run_trial(ensemble: str, n: int, k: int, tau: float, seed: int, tau_index: int, trial: int) -> bool:
    a = _GENERATORS[ensemble](n, k, ensembles.derive_seed(seed, "calibration-matrix", tau_index, trial))
    b = ensembles.sample_sphere(n, ensembles.derive_seed(seed, "calibration-noise", tau_index, trial))
    return _pure_noise_empty(a, b, tau)


def _point_rate(
    ensemble: str, n: int, k: int, tau: float, trials: int, seed: int, tau_index: int,
    workers: int,
) -> float:
    # grid points are scanned sequentially (the early stop depends on the
    # running rate-1 streak); parallelism goes across trials, which keeps
    # the report identical for any worker count
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(
                pool.map(
                    lambda t: _run_trial(ensemble, n, k, tau, seed, tau_index, t),
                    range(trials),
                )
            )
    else:
        outcomes = [_run_trial(ensemble, n, k, tau, seed, tau_index, t) for t in range(trials)]
    return sum(outcomes) / trials


def calibrate_tau(
    ensemble: str,
    n: int,
    k: int,
    grid_step: float,
    trials: int,
    seed: int,
    workers: int = 1,
) -> CalibrationReport:
    """Find the smallest tau at which pure noise is always rejected.

    Scans ``tau = 0, grid_step, 2 grid_step, ...`` up to
    ``min(1, 2 * tau_floor)``; each point runs ``trials`` independent
    pure-noise instances and success means the empty output.  Scanning
    stops once `SUSTAIN_POINTS` consecutive points hit rate 1 (or an
    all-1 trailing run reaches the ceiling); ``tau_star`` is the first
    point of that run.  If no such run exists the report carries a
    diagnostic and ``tau_star`` is None.
    """
    if ensemble not in _GENERATORS:
        raise ValueError(f"unknown ensemble {ensemble!r}; choose from {sorted(_GENERATORS)}")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    if trials < 1:
        raise ValueError("trials must be at least 1")

    gamma = math.log(k) / math.log(n)
    ceiling = min(1.0, 2.0 * tau_floor(n, gamma, 1.0))
    grid = [i * grid_step for i in range(int(math.floor(ceiling / grid_step + 1e-9)) + 1)]

    rates: list[float] = []
    run_start: int | None = None
    for i, tau in enumerate(grid):
        rate = _point_rate(ensemble, n, k, tau, trials, seed, i, workers)
        rates.append(rate)
        if rate == 1.0:
            if run_start is None:
                run_start = i
            if i - run_start + 1 >= SUSTAIN_POINTS:
                break
        else:
            run_start = None

    tau_star: float | None = None
    diagnostic: str | None = None
    if run_start is not None:
        tau_star = grid[run_start]
    else:
        diagnostic = (
            f"no trailing rate-1 run up to the scan ceiling {ceiling:.6g} "
            f"({len(rates)} grid points, {trials} trials each)"
        )

    return CalibrationReport(
        tau_grid=np.asarray(grid[: len(rates)]),
        success_rate=np.asarray(rates),
        tau_star=tau_star,
        trials_per_point=trials,
        ensemble=ensemble,
        n=n,
        k=k,
        seed=seed,
        grid_step=grid_step,
        diagnostic=diagnostic,
    )


def emit_transition_csv(report: CalibrationReport, path) -> None:
    """Write the transition diagram as CSV.

    Comment lines carry the run metadata; data rows are
    ``tau,success_rate`` with 6 significant digits and LF endings.
    Re-emitting the same report is byte-identical.
    """
    lines = [
        f"# ensemble={report.ensemble}",
        f"# n={report.n}",
        f"# k={report.k}",
        f"# trials={report.trials_per_point}",
        f"# seed={report.seed}",
        f"# grid_step={report.grid_step:.6g}",
        f"# tau_star={'' if report.tau_star is None else format(report.tau_star, '.6g')}",
        "tau,success_rate",
    ]
    for tau, rate in zip(report.tau_grid, report.success_rate):
        lines.append(f"{tau:.6g},{rate:.6g}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
