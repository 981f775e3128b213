"""Shared numerical foundations: seeded RNG streams, PSD log-determinants,
log-gamma/digamma surfaces, and log-domain mean helpers.

Everything downstream works in log space: ball volumes, Gamma factors and
per-draw determinants overflow/underflow float64 long before the dimensions
of interest, so quantities are combined with logsumexp and never
exponentiated unless provably safe.
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import SingularError

# Fixed Monte Carlo batch size. Draw layout is one substream per batch index,
# so results never depend on the thread count.
MC_BATCH = 4096

# Relative jitter ladder for near-singular PSD factorizations: each rung adds
# rel * trace/dim to the diagonal before giving up.
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)


@dataclass(frozen=True)
class RngStream:
    """Deterministic, splittable random stream.

    A (seed, stream_id) pair addresses an independent Philox stream via
    SeedSequence spawn keys. `path` is an internal extension used to hand
    collision-free substreams to batches and subtasks; it is not part of the
    public addressing contract.
    """

    seed: int
    stream_id: int = 0
    path: tuple = ()

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        if not isinstance(self.stream_id, (int, np.integer)) or self.stream_id < 0:
            raise ValueError(f"stream_id must be a non-negative integer, got {self.stream_id!r}")

    def generator(self, *path: int) -> np.random.Generator:
        """Philox generator for this stream, optionally descended by `path`."""
        key = (self.stream_id,) + tuple(self.path) + tuple(path)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        return np.random.Generator(np.random.Philox(ss))

    def split(self, stream_id: int) -> "RngStream":
        """Derived independent stream with the given id."""
        return dataclasses.replace(self, stream_id=stream_id)

    def child(self, *path: int) -> "RngStream":
        """Substream addressed by extending the internal spawn path."""
        return dataclasses.replace(self, path=tuple(self.path) + tuple(path))


def resolve_threads(threads=None) -> int:
    """Worker count: explicit argument, else MDLVOL_THREADS, else 1."""
    if threads is None:
        raw = os.environ.get("MDLVOL_THREADS", "").strip()
        if not raw:
            return 1
        try:
            threads = int(raw)
        except ValueError as exc:
            raise ValueError(f"MDLVOL_THREADS must be an integer, got {raw!r}") from exc
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def map_batches(worker, n_batches: int, threads=None) -> list:
    """Run worker(0..n_batches-1), in order, optionally on a thread pool.

    The returned list is always in batch order, so reductions over it are
    independent of the thread count.
    """
    threads = resolve_threads(threads)
    if threads == 1 or n_batches <= 1:
        return [worker(k) for k in range(n_batches)]
    with ThreadPoolExecutor(max_workers=min(threads, n_batches)) as pool:
        return list(pool.map(worker, range(n_batches)))


def batch_sizes(total: int, batch: int = MC_BATCH) -> list[int]:
    """Split `total` draws into fixed-size batches (last one ragged)."""
    if total < 1:
        raise ValueError(f"need at least one draw, got {total}")
    if batch < 1:
        raise ValueError(f"batch size must be positive, got {batch}")
    full, rem = divmod(total, batch)
    return [batch] * full + ([rem] if rem else [])


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """Exactly symmetric square float64 matrix (thin validated wrapper)."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        if not np.array_equal(arr, arr.T):
            raise ValueError("matrix must be exactly symmetric")
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _as_symmetric_array(matrix) -> np.ndarray:
    if isinstance(matrix, SymmetricMatrix):
        return matrix.entries
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    scale = np.max(np.abs(arr)) if arr.size else 0.0
    if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-8 * max(scale, 1.0)):
        raise ValueError("matrix is not symmetric")
    return arr


def _smallest_pivot(a: np.ndarray) -> float:
    # Textbook Cholesky, tracking the smallest pivot seen; runs only on the
    # error path to give SingularError something concrete to report.
    n = a.shape[0]
    L = np.zeros_like(a)
    smallest = np.inf
    for j in range(n):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        smallest = min(smallest, pivot)
        if pivot <= 0.0:
            return smallest
        L[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return smallest


def log_det_psd(matrix, jitter: float = 0.0) -> float:
    """log det of a symmetric positive-definite matrix via Cholesky.

    `jitter` is added to the diagonal before factoring. Raises SingularError
    (with the smallest pivot encountered) if the factorization fails.
    """
    a = _as_symmetric_array(matrix)
    if not np.isfinite(jitter) or jitter < 0.0:
        raise ValueError(f"jitter must be finite and >= 0, got {jitter}")
    if a.shape[0] == 0:
        return 0.0
    if jitter:
        a = a + jitter * np.eye(a.shape[0])
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise SingularError(
            "matrix is not positive definite", pivot=_smallest_pivot(a)
        ) from None
    return float(2.0 * np.sum(np.log(np.diagonal(chol))))


def log_gamma(x):
    """log Γ(x) for x > 0 (scalar or array)."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise ValueError("log_gamma requires finite x > 0")
    out = special.gammaln(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def digamma(x):
    """ψ(x) = d/dx log Γ(x) for x > 0 (scalar or array)."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise ValueError("digamma requires finite x > 0")
    out = special.psi(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def log_mean_exp(logs: np.ndarray) -> float:
    """log of the arithmetic mean of exp(logs), without leaving log space."""
    logs = np.asarray(logs, dtype=np.float64)
    if logs.size == 0:
        raise ValueError("empty sample")
    return float(special.logsumexp(logs) - np.log(logs.size))


def log_mean_exp_with_stderr(logs: np.ndarray) -> tuple[float, float]:
    """(log mean, stderr of the log mean) for exp(logs) samples.

    Stderr uses the delta method: sd(mean)/mean computed stably as
    sqrt(expm1(log m2 - 2 log m1) * n/(n-1) / n). Entries of -inf are valid
    (they contribute zero mass).
    """
    logs = np.asarray(logs, dtype=np.float64)
    n = logs.size
    if n < 2:
        raise ValueError("need at least two samples for a stderr")
    m1 = special.logsumexp(logs) - np.log(n)
    if not np.isfinite(m1):
        return float(m1), 0.0
    m2 = special.logsumexp(2.0 * logs) - np.log(n)
    rel2 = np.expm1(m2 - 2.0 * m1) * n / (n - 1.0)
    return float(m1), float(np.sqrt(max(rel2, 0.0) / n))


@dataclass(frozen=True)
class VolumeEstimate:
    """Monte Carlo log-volume with optional analytic sandwich bounds."""

    value: float
    stderr: float
    samples: int
    lower: float | None = None
    upper: float | None = None
    rejected: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.rejected < 0:
            raise ValueError(f"rejected count must be >= 0, got {self.rejected}")
        if not (self.stderr >= 0.0):
            raise ValueError(f"stderr must be >= 0, got {self.stderr}")
