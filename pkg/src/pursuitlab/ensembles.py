"""Measurement ensembles, sparse signals, noise, and problem assembly.

Randomness policy
-----------------
All draws flow through numpy's counter-based Philox generator.  Every
object derives its own stream from ``(master_seed, purpose_tag, *indices)``
via `derive_rng`, so trials are independent, replayable in any order, and
bit-identical across runs for the same master seed.

Real-valued ensembles (the Gaussian one) are stored as ``complex128`` with
zero imaginary parts so a single code path serves both real and complex
matrices.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

ENSEMBLE_CODES = {"gaussian": 0, "partial_fourier": 1, "user": 2}
_CODE_NAMES = {v: k for k, v in ENSEMBLE_CODES.items()}

_CONTAINER_MAGIC = b"PLAB"
_CONTAINER_VERSION = 1
_HEADER = struct.Struct("<4sIIIIQ")  # magic, version, N, K, ensemble code, seed


def derive_rng(seed: int, purpose: str, *indices: int) -> np.random.Generator:
    """Philox generator keyed by ``(seed, purpose, indices)``.

    The purpose tag is hashed with CRC-32 so unrelated draw sites never
    share a stream even when their numeric indices coincide.
    """
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    tag = zlib.crc32(purpose.encode("ascii"))
    ss = np.random.SeedSequence(entropy=[int(seed), tag, *[int(i) for i in indices]])
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, purpose: str, *indices: int) -> int:
    """Deterministic 64-bit child seed for handing to a generator function."""
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    tag = zlib.crc32(purpose.encode("ascii"))
    ss = np.random.SeedSequence(entropy=[int(seed), tag, *[int(i) for i in indices]])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class MeasurementMatrix:
    """Dense N-by-K matrix with unit-norm columns plus ensemble metadata."""

    matrix: np.ndarray  # complex128, column-major
    ensemble: str
    seed: int

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> int:
        return self.matrix.shape[1]


@dataclass
class SparseSignal:
    """Support indices plus the nonzero complex values living on them."""

    length: int
    support: np.ndarray  # sorted int64 indices
    values: np.ndarray  # complex128, aligned with support

    def dense(self) -> np.ndarray:
        x = np.zeros(self.length, dtype=np.complex128)
        x[self.support] = self.values
        return x


@dataclass
class ProblemInstance:
    """One recovery problem: observation ``b = A x + e``."""

    a: MeasurementMatrix
    x: SparseSignal
    e: np.ndarray
    b: np.ndarray
    delta: float  # ||e|| / ||A x||, against the noiseless observation

    noiseless_norm: float = field(default=0.0)
    noise_norm: float = field(default=0.0)


def _normalize_columns(m: np.ndarray) -> None:
    norms = np.sqrt(np.einsum("ij,ij->j", m.real, m.real) + np.einsum("ij,ij->j", m.imag, m.imag))
    m /= norms[np.newaxis, :]


def gen_gaussian(n: int, k: int, seed: int) -> MeasurementMatrix:
    """Real i.i.d. standard-normal entries, columns rescaled to unit norm."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    rng = derive_rng(seed, "gaussian-matrix")
    m = np.zeros((n, k), dtype=np.complex128, order="F")
    m.real = rng.standard_normal((n, k))
    _normalize_columns(m)
    return MeasurementMatrix(matrix=m, ensemble="gaussian", seed=seed)


def gen_partial_fourier(n: int, k: int, seed: int) -> MeasurementMatrix:
    """N distinct rows drawn uniformly from the K-by-K unitary DFT.

    Row selection takes the first N entries of a seeded permutation of
    ``[0, K)`` (uniform without replacement).  Columns are rescaled to
    unit norm, i.e. multiplied by sqrt(K/N).
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if n > k:
        raise ValueError(f"cannot select {n} distinct rows from a {k}x{k} DFT")
    rng = derive_rng(seed, "fourier-rows")
    rows = np.sort(rng.permutation(k)[:n])
    # reduce the phase index mod K before scaling so angles stay small and exact
    phase_idx = (rows[:, np.newaxis].astype(np.int64) * np.arange(k, dtype=np.int64)) % k
    m = np.exp((-2j * np.pi / k) * phase_idx) / np.sqrt(n)
    m = np.asfortranarray(m)
    _normalize_columns(m)
    return MeasurementMatrix(matrix=m, ensemble="partial_fourier", seed=seed)


def mutual_coherence(mm: MeasurementMatrix, block: int = 256) -> float:
    """Largest absolute inner product between distinct columns.

    Computed blockwise so the full K-by-K Gram matrix is never held in
    memory at once.
    """
    a = mm.matrix
    k = a.shape[1]
    if k < 2:
        raise ValueError("mutual coherence needs at least two columns")
    mu = 0.0
    for j0 in range(0, k, block):
        blk = a[:, j0 : j0 + block]
        g = np.abs(blk.conj().T @ a)  # (nb, k)
        nb = g.shape[0]
        g[np.arange(nb), j0 + np.arange(nb)] = 0.0
        mu = max(mu, float(g.max()))
    return mu


def gen_signal(k: int, m: int, seed: int) -> SparseSignal:
    """M-sparse signal: uniform random support, values ``1 + N(0,1)``.

    A value landing exactly at zero is redrawn (probability-zero event,
    but the nonzero invariant must hold).
    """
    if not 1 <= m <= k:
        raise ValueError(f"need 1 <= m <= k, got m={m}, k={k}")
    rng = derive_rng(seed, "signal")
    support = np.sort(rng.permutation(k)[:m])
    values = 1.0 + rng.standard_normal(m)
    while np.any(values == 0.0):
        redraw = values == 0.0
        values[redraw] = 1.0 + rng.standard_normal(int(redraw.sum()))
    return SparseSignal(length=k, support=support, values=values.astype(np.complex128))


def sample_sphere(n: int, seed: int) -> np.ndarray:
    """Uniform draw from the unit sphere: normalized standard-normal vector."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = derive_rng(seed, "sphere")
    v = rng.standard_normal(n)
    while not np.any(v):
        v = rng.standard_normal(n)
    return (v / np.linalg.norm(v)).astype(np.complex128)


def make_instance(
    a: MeasurementMatrix, x: SparseSignal, delta: float, seed: int
) -> ProblemInstance:
    """Assemble ``b = A x + e`` with ``||e|| = delta * ||A x||``.

    ``delta`` is measured against the noiseless observation norm.  For a
    zero signal use `make_pure_noise_instance`, which takes the noise norm
    directly.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    ax = a.matrix[:, x.support] @ x.values
    ax_norm = float(np.linalg.norm(ax))
    if delta == 0.0:
        e = np.zeros(a.n, dtype=np.complex128)
        b = ax
    else:
        e = delta * ax_norm * sample_sphere(a.n, derive_seed(seed, "instance-noise"))
        b = ax + e
    return ProblemInstance(
        a=a,
        x=x,
        e=e,
        b=b,
        delta=delta,
        noiseless_norm=ax_norm,
        noise_norm=float(np.linalg.norm(e)),
    )


def make_pure_noise_instance(
    a: MeasurementMatrix, noise_norm: float, seed: int
) -> ProblemInstance:
    """Zero signal, ``b = e`` with the requested norm and uniform direction."""
    if noise_norm <= 0:
        raise ValueError("noise_norm must be positive")
    e = noise_norm * sample_sphere(a.n, derive_seed(seed, "instance-noise"))
    x = SparseSignal(
        length=a.k,
        support=np.zeros(0, dtype=np.int64),
        values=np.zeros(0, dtype=np.complex128),
    )
    return ProblemInstance(
        a=a,
        x=x,
        e=e,
        b=e.copy(),
        delta=float("inf"),
        noiseless_norm=0.0,
        noise_norm=float(np.linalg.norm(e)),
    )


def save_matrix(mm: MeasurementMatrix, path) -> None:
    """Write a matrix container.

    Layout: little-endian header (magic ``PLAB``, u32 version, u32 N,
    u32 K, u32 ensemble code, u64 seed) followed by N*K row-major
    float64 (re, im) pairs.
    """
    code = ENSEMBLE_CODES.get(mm.ensemble)
    if code is None:
        raise ValueError(f"unknown ensemble tag {mm.ensemble!r}")
    header = _HEADER.pack(_CONTAINER_MAGIC, _CONTAINER_VERSION, mm.n, mm.k, code, mm.seed)
    payload = np.ascontiguousarray(mm.matrix).astype("<c16").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_matrix(path) -> MeasurementMatrix:
    """Read a matrix container written by `save_matrix`."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated container header")
    magic, version, n, k, code, seed = _HEADER.unpack_from(raw)
    if magic != _CONTAINER_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != _CONTAINER_VERSION:
        raise ValueError(f"{path}: unsupported container version {version}")
    expected = _HEADER.size + n * k * 16
    if len(raw) != expected:
        raise ValueError(f"{path}: payload size {len(raw)} != expected {expected}")
    ensemble = _CODE_NAMES.get(code)
    if ensemble is None:
        raise ValueError(f"{path}: unknown ensemble code {code}")
    m = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(n, k)
    m = np.asfortranarray(m.astype(np.complex128))
    norms = np.linalg.norm(m, axis=0)
    if np.max(np.abs(norms - 1.0)) > 1e-12:
        raise ValueError(f"{path}: columns are not unit-norm")
    return MeasurementMatrix(matrix=m, ensemble=ensemble, seed=seed)
