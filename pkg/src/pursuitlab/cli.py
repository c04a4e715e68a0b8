"""Command-line front end.

Every subcommand requires --seed; all randomness derives from it, so a
repeated invocation with identical flags reproduces its output files
byte for byte (wall-clock timing columns excepted).  Exit codes: 0 on
completion, 1 on runtime errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import ensembles
from .calibration import calibrate_tau, emit_transition_csv
from .errors import RankDeficiencyError
from .experiments import (
    emit_phase_csv,
    emit_sweep_csv,
    emit_trials_csv,
    run_comparison,
    run_phase_diagram,
)
from .tgp import TgpParams, sparsity_cap, tau_exact_recovery, tgp_recover

_ENSEMBLES = {"gaussian": "gaussian", "fourier": "partial_fourier"}


def parse_int_range(text: str) -> list[int]:
    """Parse '1:10' (inclusive) or '1,2,5' into a list of ints."""
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok]


def parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def _add_common(sub, *, ensemble=True, out=False, serial=False):
    if ensemble:
        sub.add_argument("--ensemble", choices=sorted(_ENSEMBLES), default="gaussian",
                         help="measurement ensemble")
    sub.add_argument("--seed", type=int, required=True,
                     help="master seed; all randomness derives from it (required)")
    if out:
        sub.add_argument("--out", required=True, help="output CSV path")
    if serial:
        sub.add_argument("--serial", action="store_true", default=False,
                         help="run trials single-threaded (for timing measurements)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pursuitlab",
        description="Greedy sparse recovery: thresholding pursuit, CoSaMP baseline, "
                    "threshold calibration, and Monte-Carlo experiments.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = subs.add_parser("recover", formatter_class=fmt,
                        help="recover one synthesized or loaded instance")
    _add_common(p)
    p.add_argument("--n", type=int, default=400, help="measurement count N")
    p.add_argument("--k", type=int, default=800, help="signal length K")
    p.add_argument("--m", type=int, default=3,
                   help="sparsity; 0 means a pure-noise instance with unit noise norm")
    p.add_argument("--delta", type=float, default=0.0,
                   help="noise level ||e|| / ||A x|| (ignored when --m 0)")
    p.add_argument("--tau", type=float, required=True, help="threshold parameter (required)")
    p.add_argument("--cg-tol", type=float, default=1e-12, help="solver relative tolerance")
    p.add_argument("--input", default=None,
                   help="matrix container to load instead of synthesizing the matrix")
    p.add_argument("--trace-out", default=None, help="optional per-iteration trace CSV path")

    p = subs.add_parser("calibrate", formatter_class=fmt,
                        help="calibrate tau on pure noise (transition diagram)")
    _add_common(p, out=True, serial=True)
    p.add_argument("--n", type=int, default=1600, help="measurement count N")
    p.add_argument("--k", type=int, default=3200, help="signal length K")
    p.add_argument("--trials", type=int, default=50, help="trials per grid point")
    p.add_argument("--grid-step", type=float, default=0.003, help="tau grid increment")

    p = subs.add_parser("compare", formatter_class=fmt,
                        help="pursuit-vs-CoSaMP sweep over sparsity and noise levels")
    _add_common(p, out=True, serial=True)
    p.add_argument("--n", type=int, default=1600, help="measurement count N")
    p.add_argument("--k", type=int, default=3200, help="signal length K")
    p.add_argument("--m-range", default="1:10", help="sparsity levels, '1:10' or '1,2,5'")
    p.add_argument("--deltas", default="0,0.5,1", help="comma-separated noise levels")
    p.add_argument("--tau", type=float, required=True,
                   help="threshold parameter, typically calibrated first (required)")
    p.add_argument("--trials", type=int, default=20, help="trials per (M, delta) cell")
    p.add_argument("--trials-out", default=None, help="optional raw per-trial CSV path")

    p = subs.add_parser("phase", formatter_class=fmt,
                        help="exact-recovery phase diagram over (M, delta)")
    _add_common(p, out=True, serial=True)
    p.add_argument("--n", type=int, default=400, help="measurement count N")
    p.add_argument("--k", type=int, default=800, help="signal length K")
    p.add_argument("--m-range", default="1:10", help="sparsity levels, '1:10' or '1,2,5'")
    p.add_argument("--deltas", default="0,0.5,1,2,4,8", help="comma-separated noise levels")
    p.add_argument("--tau", type=float, required=True, help="threshold parameter (required)")
    p.add_argument("--trials", type=int, default=20, help="trials per cell")

    p = subs.add_parser("coherence", formatter_class=fmt,
                        help="mutual coherence and the parameter choices it implies")
    _add_common(p)
    p.add_argument("--n", type=int, default=400, help="measurement count N")
    p.add_argument("--k", type=int, default=800, help="signal length K")
    p.add_argument("--input", default=None,
                   help="matrix container to load instead of synthesizing the matrix")

    return parser


def _workers(args) -> int:
    if getattr(args, "serial", False):
        return 1
    return min(8, os.cpu_count() or 1)


def _get_matrix(args):
    if getattr(args, "input", None):
        return ensembles.load_matrix(args.input)
    gen = {"gaussian": ensembles.gen_gaussian,
           "partial_fourier": ensembles.gen_partial_fourier}[_ENSEMBLES[args.ensemble]]
    return gen(args.n, args.k, args.seed)


def _fmt_complex(z: complex) -> str:
    if z.imag == 0.0:
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}j"


def cmd_recover(args) -> int:
    a = _get_matrix(args)
    if args.m == 0:
        inst = ensembles.make_pure_noise_instance(a, 1.0, args.seed)
    else:
        x = ensembles.gen_signal(a.k, args.m, ensembles.derive_seed(args.seed, "trial-signal"))
        inst = ensembles.make_instance(a, x, args.delta,
                                       ensembles.derive_seed(args.seed, "trial-noise"))
    res = tgp_recover(a, inst.b, TgpParams(tau=args.tau, cg_tol=args.cg_tol))
    if res.omega.size:
        print("support:", " ".join(str(int(i)) for i in res.omega))
        print("coefficients:", " ".join(_fmt_complex(complex(c)) for c in res.coefficients))
    else:
        print("support: empty")
    print(f"stop_reason: {res.stop_reason}")
    print(f"iterations: {res.iterations}")
    print(f"elapsed_s: {res.elapsed:.6g}")
    if args.trace_out and res.trace is not None:
        lines = ["iteration,proxy_max,new_indices,residual_norm,cg_iterations"]
        for i, step in enumerate(res.trace, start=1):
            idx = "|".join(str(int(j)) for j in step.new_indices)
            lines.append(f"{i},{step.proxy_max:.6g},{idx},{step.residual_norm:.6g},"
                         f"{step.cg_iterations}")
        with open(args.trace_out, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def cmd_calibrate(args) -> int:
    report = calibrate_tau(_ENSEMBLES[args.ensemble], args.n, args.k,
                           args.grid_step, args.trials, args.seed,
                           workers=_workers(args))
    emit_transition_csv(report, args.out)
    if report.tau_star is None:
        print(f"tau_star: not found ({report.diagnostic})")
    else:
        print(f"tau_star: {report.tau_star:.6g}")
    print(f"wrote {args.out}")
    return 0


def cmd_compare(args) -> int:
    table = run_comparison(_ENSEMBLES[args.ensemble], args.n, args.k,
                           parse_int_range(args.m_range), parse_float_list(args.deltas),
                           args.tau, args.trials, args.seed, workers=_workers(args))
    emit_sweep_csv(table, args.out)
    if args.trials_out:
        emit_trials_csv(table, args.trials_out)
    failures = sum(r.failures for r in table.rows)
    print(f"wrote {args.out} ({len(table.rows)} rows, {failures} failed trials)")
    return 0


def cmd_phase(args) -> int:
    grid = run_phase_diagram(_ENSEMBLES[args.ensemble], args.n, args.k,
                             parse_int_range(args.m_range), parse_float_list(args.deltas),
                             args.tau, args.trials, args.seed, workers=_workers(args))
    emit_phase_csv(grid, args.out)
    print(f"wrote {args.out} ({grid.m_values.size * grid.delta_values.size} cells)")
    return 0


def cmd_coherence(args) -> int:
    a = _get_matrix(args)
    mu = ensembles.mutual_coherence(a)
    gamma = math.log(a.k) / math.log(a.n)
    print(f"mu: {mu:.6g}")
    print(f"1/(4 mu): {1.0 / (4.0 * mu):.6g}" if mu > 0 else "1/(4 mu): inf")
    print(f"sparsity_cap: {sparsity_cap(mu, a.n, gamma, 1.0)}")
    print(f"tau_exact_recovery: {tau_exact_recovery(min(mu, 1.0), a.n, gamma, 1.0):.6g}")
    return 0


_COMMANDS = {
    "recover": cmd_recover,
    "calibrate": cmd_calibrate,
    "compare": cmd_compare,
    "phase": cmd_phase,
    "coherence": cmd_coherence,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed < 0:
        parser.error("--seed must be nonnegative")
    try:
        return _COMMANDS[args.command](args)
    except RankDeficiencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
