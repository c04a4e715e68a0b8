"""Greedy sparse-recovery toolkit.

Thresholding greedy pursuit with its closed-form parameter choices, a
CoSaMP baseline on the same numerical substrate, measurement ensembles,
pure-noise threshold calibration, and a Monte-Carlo experiment harness.
"""

from .calibration import CalibrationReport, calibrate_tau, emit_transition_csv
from .cosamp import CosampParams, cosamp_recover
from .ensembles import (
    MeasurementMatrix,
    ProblemInstance,
    SparseSignal,
    derive_rng,
    derive_seed,
    gen_gaussian,
    gen_partial_fourier,
    gen_signal,
    load_matrix,
    make_instance,
    make_pure_noise_instance,
    mutual_coherence,
    sample_sphere,
    save_matrix,
)
from .errors import RankDeficiencyError
from .experiments import (
    PhaseGrid,
    SweepRow,
    SweepTable,
    TrialRecord,
    emit_phase_csv,
    emit_sweep_csv,
    emit_trials_csv,
    per_iteration_flops,
    phase_overlay,
    run_comparison,
    run_phase_diagram,
)
from .linalg import (
    CgReport,
    as_index_set,
    cg_solve,
    complement_project,
    gram_extreme_eigs,
    inner,
    least_squares_fit,
    norm2,
)
from .tgp import (
    IterationStep,
    RecoveryResult,
    TgpParams,
    noise_floor_constant,
    noise_tolerance,
    sparsity_cap,
    tau_exact_recovery,
    tau_floor,
    tgp_recover,
    threshold,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationReport",
    "CgReport",
    "CosampParams",
    "IterationStep",
    "MeasurementMatrix",
    "PhaseGrid",
    "ProblemInstance",
    "RankDeficiencyError",
    "RecoveryResult",
    "SparseSignal",
    "SweepRow",
    "SweepTable",
    "TgpParams",
    "TrialRecord",
    "as_index_set",
    "calibrate_tau",
    "cg_solve",
    "complement_project",
    "cosamp_recover",
    "derive_rng",
    "derive_seed",
    "emit_phase_csv",
    "emit_sweep_csv",
    "emit_transition_csv",
    "emit_trials_csv",
    "gen_gaussian",
    "gen_partial_fourier",
    "gen_signal",
    "gram_extreme_eigs",
    "inner",
    "least_squares_fit",
    "load_matrix",
    "make_instance",
    "make_pure_noise_instance",
    "mutual_coherence",
    "noise_floor_constant",
    "noise_tolerance",
    "norm2",
    "per_iteration_flops",
    "phase_overlay",
    "run_comparison",
    "run_phase_diagram",
    "sample_sphere",
    "save_matrix",
    "sparsity_cap",
    "tau_exact_recovery",
    "tau_floor",
    "tgp_recover",
    "threshold",
]
