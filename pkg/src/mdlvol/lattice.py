"""Statistical lattice models.

A finite lattice (poset with all joins and a least element) carries a
probability model P(q) per element; its expectation coordinates are
η_p = Σ_{q ≥ p} P(q) = (Zδ)_p with Z the zeta matrix of the order. The
Fisher metric in η is G_ij = η_{i∨j} − η_i η_j; the least element's
row/column vanish identically and are dropped. The model volume
∫√det G' over the simplex is estimated by Monte Carlo against
Dirichlet(1,…,1) draws, with Cholesky/Hadamard sandwich bounds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import NotALatticeError, RejectionRateError
from .numerics import (
    JITTER_LADDER,
    RngStream,
    SymmetricMatrix,
    VolumeEstimate,
    batch_sizes,
    log_gamma,
    log_mean_exp,
    log_mean_exp_with_stderr,
    map_batches,
)

MAX_REJECTION_RATE = 0.01

# O(D^3) whole-matrix checks run at construction up to this size; larger
# lattices rely on the construction paths (subset order / transitive closure)
# being transitive by construction.
_FULL_CHECK_LIMIT = 2048


@dataclass(frozen=True, eq=False)
class Lattice:
    """Finite lattice in a fixed linear extension (element 0 is the bottom).

    zeta[i, j] = 1 iff i ≤ j; upper-triangular with unit diagonal.
    join_table[i, j] is the index of i ∨ j.
    """

    size: int
    zeta: np.ndarray
    join_table: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        d = int(self.size)
        zeta = np.ascontiguousarray(self.zeta, dtype=np.uint8)
        joins = np.ascontiguousarray(self.join_table)
        object.__setattr__(self, "size", d)
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "join_table", joins)
        if d < 1:
            raise ValueError(f"lattice size must be >= 1, got {d}")
        if zeta.shape != (d, d) or joins.shape != (d, d):
            raise ValueError("zeta and join_table must be size x size")
        if len(self.labels) != d:
            raise ValueError(f"need {d} labels, got {len(self.labels)}")
        if not np.all((zeta == 0) | (zeta == 1)):
            raise ValueError("zeta entries must be 0/1")
        if np.any(np.diagonal(zeta) != 1):
            raise NotALatticeError("order is not reflexive (zeta diagonal must be 1)")
        if np.any(np.tril(zeta, -1) != 0):
            raise NotALatticeError("zeta is not upper-triangular in the stored order")
        if np.any(zeta[0, :] != 1):
            raise NotALatticeError("element 0 is not a least element")
        if d <= _FULL_CHECK_LIMIT:
            zb = zeta.astype(np.float64)
            closed = (zb @ zb) > 0.5
            if not np.array_equal(closed, zeta.astype(bool)):
                raise NotALatticeError("order is not transitive")
        if joins.min() < 0 or joins.max() >= d:
            raise ValueError("join_table indices out of range")
        if not np.array_equal(joins, joins.T):
            raise NotALatticeError("join table is not symmetric")
        if np.any(np.diagonal(joins) != np.arange(d)):
            raise NotALatticeError("join is not idempotent (i v i != i)")
        # i <= (i v j) for every pair; with symmetry this covers j <= (i v j)
        if not np.all(np.take_along_axis(zeta, joins.astype(np.intp), axis=1) == 1):
            raise NotALatticeError("join table entry is not an upper bound")

    @cached_property
    def _zeta_t_float(self) -> np.ndarray:
        # transposed float zeta, cached for eta = delta @ Z^T batches
        return np.ascontiguousarray(self.zeta.astype(np.float64).T)

    def validate(self) -> None:
        """Full pairwise audit that every join is the *least* upper bound.

        O(D^3) with python-level pair loops; meant for tests and small
        lattices, not the construction hot path.
        """
        z = self.zeta.astype(bool)
        for i in range(self.size):
            for j in range(i, self.size):
                common = z[i] & z[j]
                cand = np.flatnonzero(common)
                if cand.size == 0:
                    raise NotALatticeError(
                        f"elements {self.labels[i]!r} and {self.labels[j]!r} have no upper bound")
                least = cand[0]
                if not np.all(z[least][common]):
                    raise NotALatticeError(
                        f"elements {self.labels[i]!r} and {self.labels[j]!r} "
                        "have no least upper bound")
                if self.join_table[i, j] != least:
                    raise NotALatticeError(
                        f"join_table[{i},{j}] is not the least upper bound")

    def cover_pairs(self) -> list[tuple[int, int]]:
        """Covering relation (i, j): i < j with nothing strictly between."""
        strict = self.zeta.astype(np.int64) - np.eye(self.size, dtype=np.int64)
        two_step = strict @ strict
        cover = (strict == 1) & (two_step == 0)
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(cover))]

    def to_json(self) -> str:
        payload = {
            "size": self.size,
            "cover_pairs": [list(p) for p in self.cover_pairs()],
            "labels": list(self.labels),
        }
        return json.dumps(payload, indent=2, sort_keys=True)


@dataclass(frozen=True, eq=False)
class EtaCoordinates:
    """Expectation coordinates η over a lattice's linear extension."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError(f"eta must be a nonempty vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("eta entries must be finite")
        if abs(arr[0] - 1.0) > 1e-9:
            raise ValueError(f"eta[0] must be 1 (total mass), got {arr[0]!r}")
        if arr.min() < -1e-12 or arr.max() > 1.0 + 1e-12:
            raise ValueError("eta entries must lie in [0, 1]")
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return self.values.size


def _index_dtype(size: int):
    return np.uint16 if size <= 1 << 16 else np.uint32


def build_boolean_lattice(n: int) -> Lattice:
    """Boolean lattice {0,1}^n under bitwise order, join = bitwise OR.

    Linear extension sorted by (popcount, numeric value). Memory grows as
    4^n for the join table; n around 14 already needs ~0.5 GB.
    """
    n = int(n)
    if not 1 <= n <= 20:
        raise ValueError(f"n must be in [1, 20], got {n}")
    d = 1 << n
    values = np.arange(d, dtype=np.uint32)
    pop = np.bitwise_count(values)
    order = np.lexsort((values, pop))
    masks = values[order]
    rank = np.empty(d, dtype=np.int64)
    rank[masks] = np.arange(d)
    zeta = np.empty((d, d), dtype=np.uint8)
    join = np.empty((d, d), dtype=_index_dtype(d))
    step = max(1, (1 << 22) // d)  # row blocks capping scratch at a few MB
    for lo in range(0, d, step):
        block = masks[lo : lo + step, None]
        zeta[lo : lo + step] = (block & ~masks[None, :]) == 0
        join[lo : lo + step] = rank[block | masks[None, :]]
    labels = tuple(format(int(m), f"0{n}b") for m in masks)
    return Lattice(size=d, zeta=zeta, join_table=join, labels=labels)


def build_lattice_from_covers(size: int, cover_pairs, labels=None) -> Lattice:
    """Lattice from a covering relation on elements 0..size-1.

    Takes the transitive closure, checks for a least element, relabels into
    a deterministic linear extension (down-set size, then original index),
    and builds the join table by least-upper-bound search. Raises
    NotALatticeError naming the offending pair when some join is missing.
    """
    size = int(size)
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    if labels is None:
        labels = [str(i) for i in range(size)]
    labels = [str(s) for s in labels]
    if len(labels) != size:
        raise ValueError(f"need {size} labels, got {len(labels)}")
    reach = np.eye(size, dtype=bool)
    for pair in cover_pairs:
        a, b = int(pair[0]), int(pair[1])
        if not (0 <= a < size and 0 <= b < size):
            raise ValueError(f"cover pair {pair} out of range for size {size}")
        if a == b:
            raise NotALatticeError(f"self-loop cover on element {labels[a]!r}")
        reach[a, b] = True
    # transitive closure by repeated boolean squaring
    while True:
        closed = (reach.astype(np.float64) @ reach.astype(np.float64)) > 0.5
        if np.array_equal(closed, reach):
            break
        reach = closed
    cyc = reach & reach.T & ~np.eye(size, dtype=bool)
    if np.any(cyc):
        i, j = np.argwhere(cyc)[0]
        raise NotALatticeError(
            f"cover relation is cyclic: {labels[i]!r} and {labels[j]!r} "
            "are mutually reachable")
    if not np.any(reach.all(axis=1)):
        raise NotALatticeError("no least element below every other element")
    downset = reach.sum(axis=0)
    order = np.lexsort((np.arange(size), downset))
    zeta = reach[np.ix_(order, order)].astype(np.uint8)
    new_labels = tuple(labels[k] for k in order)
    z = zeta.astype(bool)
    join = np.zeros((size, size), dtype=_index_dtype(size))
    for i in range(size):
        for j in range(i, size):
            common = z[i] & z[j]
            cand = np.flatnonzero(common)
            if cand.size == 0:
                raise NotALatticeError(
                    f"elements {new_labels[i]!r} and {new_labels[j]!r} have no upper bound")
            least = cand[0]  # a LUB, if it exists, is position-minimal
            if not np.all(z[least][common]):
                raise NotALatticeError(
                    f"elements {new_labels[i]!r} and {new_labels[j]!r} "
                    "have no least upper bound")
            join[i, j] = join[j, i] = least
    return Lattice(size=size, zeta=zeta, join_table=join, labels=new_labels)


def lattice_from_json(text: str) -> Lattice:
    payload = json.loads(text)
    return build_lattice_from_covers(
        payload["size"], payload["cover_pairs"], payload.get("labels"))


def load_lattice(spec_string: str) -> Lattice:
    """Resolve a lattice argument: "bool:n" shorthand or a JSON file path."""
    s = str(spec_string).strip()
    if s.startswith("bool:"):
        try:
            n = int(s.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad boolean-lattice spec {s!r}; expected bool:<n>") from None
        return build_boolean_lattice(n)
    with open(s, "r", encoding="utf-8") as fh:
        return lattice_from_json(fh.read())


def _check_order_compatible(lat: Lattice, values: np.ndarray):
    # p <= q must imply eta_p >= eta_q
    mask = lat.zeta.astype(bool)
    bad = mask & (values[:, None] < values[None, :] - 1e-12)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise ValueError(
            f"eta not order-compatible: eta[{i}]={values[i]!r} < eta[{j}]={values[j]!r} "
            f"but {lat.labels[i]!r} <= {lat.labels[j]!r}")


def eta_from_distribution(lat: Lattice, probs) -> EtaCoordinates:
    """η = Z·probs for a probability vector over lattice elements
    (indexed in the stored linear extension)."""
    p = np.ascontiguousarray(probs, dtype=np.float64)
    if p.shape != (lat.size,):
        raise ValueError(f"probs must have length {lat.size}, got shape {p.shape}")
    if p.min() < -1e-12:
        raise ValueError(f"probs must be nonnegative, min is {p.min()!r}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probs must sum to 1 within 1e-9, got {p.sum()!r}")
    values = lat.zeta.astype(np.float64) @ p
    values[0] = 1.0  # exact total mass; kills the last-ulp summation drift
    _check_order_compatible(lat, values)
    return EtaCoordinates(values)


def metric_tensor(lat: Lattice, eta, reduced: bool = True) -> SymmetricMatrix:
    """Fisher metric G_ij = η_{i∨j} − η_i η_j; reduced drops the bottom
    element's identically-zero row/column."""
    values = eta.values if isinstance(eta, EtaCoordinates) else EtaCoordinates(eta).values
    if values.size != lat.size:
        raise ValueError(f"eta has {values.size} entries but lattice size is {lat.size}")
    full = values[lat.join_table.astype(np.intp)] - np.outer(values, values)
    return SymmetricMatrix(full[1:, 1:] if reduced else full)


def sample_eta(lat: Lattice, rng: RngStream):
    """One Dirichlet(1,…,1) draw δ (normalized standard exponentials) and
    its η = Zδ."""
    g = rng.generator()
    e = g.standard_exponential(lat.size)
    delta = e / e.sum()
    values = lat.zeta.astype(np.float64) @ delta
    values[0] = 1.0
    return delta, EtaCoordinates(values)


def log_simplex_volume(d: int) -> float:
    """log volume of the (d−1)-probability-simplex: −log Γ(d)."""
    d = int(d)
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    return -log_gamma(d)


def _draw_stats(lat: Lattice, samples: int, rng: RngStream, threads=None):
    """Batched per-draw (half log det, half log diag-product, ok) for the
    reduced metric under Dirichlet(1,…,1) δ draws."""
    sizes = batch_sizes(samples)
    join_red = np.ascontiguousarray(lat.join_table[1:, 1:], dtype=np.int32)
    ladder = np.asarray(JITTER_LADDER, dtype=np.float64)
    zt = lat._zeta_t_float

    def worker(k):
        g = rng.generator(k)
        e = g.standard_exponential((sizes[k], lat.size))
        delta = e / e.sum(axis=1, keepdims=True)
        eta = delta @ zt
        return _kernels.lattice_draw_stats(eta, join_red, ladder)

    parts = map_batches(worker, len(sizes), threads)
    half_logdet = np.concatenate([p[0] for p in parts])
    half_logdiag = np.concatenate([p[1] for p in parts])
    ok = np.concatenate([p[2] for p in parts])
    rejected = int(samples - np.count_nonzero(ok))
    if rejected > MAX_REJECTION_RATE * samples:
        raise RejectionRateError(
            f"{rejected}/{samples} draws rejected (non-PSD metric after the "
            f"jitter ladder); limit is {MAX_REJECTION_RATE:.0%}")
    return half_logdet[ok], half_logdiag[ok], rejected


def lattice_log_volume_mc(lat: Lattice, samples: int = 10000,
                          rng: RngStream | None = None,
                          threads=None) -> VolumeEstimate:
    """Monte Carlo log-volume: log E[√det G'(δ)] − log Γ(D).

    Draws whose reduced metric is not positive definite after the jitter
    ladder are rejected and counted (error above a 1% rate). The sandwich
    bounds are computed from the same draws.
    """
    samples = int(samples)
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    if rng is None:
        rng = RngStream(0)
    half_logdet, half_logdiag, rejected = _draw_stats(lat, samples, rng, threads)
    if half_logdet.size < 2:
        raise RejectionRateError("fewer than two accepted draws; cannot estimate")
    correction = log_gamma(lat.size)
    value, stderr = log_mean_exp_with_stderr(half_logdet)
    lower = float(np.mean(half_logdet)) - correction
    upper = log_mean_exp(half_logdiag) - correction
    return VolumeEstimate(
        value=value - correction,
        stderr=stderr,
        samples=int(half_logdet.size),
        lower=lower,
        upper=upper,
        rejected=rejected,
    )


def lattice_volume_bounds(lat: Lattice, samples: int = 10000,
                          rng: RngStream | None = None,
                          threads=None) -> tuple[float, float]:
    """Sandwich bounds (E[Σ log M_ii] − log Γ(D), log E[√ΠG'_ii] − log Γ(D))
    from the same draw layout as lattice_log_volume_mc."""
    est = lattice_log_volume_mc(lat, samples=samples, rng=rng, threads=threads)
    return est.lower, est.upper


def hadamard_upper_majorant(d: int) -> float:
    """Analytic majorant of the Hadamard upper bound: every reduced diagonal
    entry is η(1−η) ≤ 1/4, so upper ≤ ((D−1)/2)·log(1/4) − log Γ(D)."""
    d = int(d)
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    return ((d - 1) / 2.0) * np.log(0.25) - log_gamma(d)


def limiting_volume_check(lattice_family, samples: int = 2000,
                          rng: RngStream | None = None,
                          threads=None) -> list[tuple[int, float]]:
    """(size, Hadamard upper bound) per lattice, asserting the bound is
    strictly decreasing beyond its peak (the Γ(D) term dominates).

    Only the diagonal statistic is sampled, so large lattices (Boolean n=10,
    D=1024) stay cheap.
    """
    lats = list(lattice_family)
    if not lats:
        raise ValueError("empty lattice family")
    dims = [lat.size for lat in lats]
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError(f"family must be ordered by increasing size, got {dims}")
    samples = int(samples)
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    if rng is None:
        rng = RngStream(0)
    rows = []
    for k, lat in enumerate(lats):
        sub = rng.child(k)
        sizes = batch_sizes(samples)
        zt = lat._zeta_t_float

        def worker(b, lat=lat, sub=sub, sizes=sizes, zt=zt):
            g = sub.generator(b)
            e = g.standard_exponential((sizes[b], lat.size))
            delta = e / e.sum(axis=1, keepdims=True)
            tail = (delta @ zt)[:, 1:]
            diag = np.clip(tail * (1.0 - tail), 0.0, None)
            with np.errstate(divide="ignore"):
                return 0.5 * np.sum(np.log(diag), axis=1)

        half_logdiag = np.concatenate(map_batches(worker, len(sizes), threads))
        rows.append((lat.size, log_mean_exp(half_logdiag) - log_gamma(lat.size)))
    uppers = [u for _, u in rows]
    peak = int(np.argmax(uppers))
    for a, b in zip(uppers[peak:], uppers[peak + 1:]):
        if not b < a:
            raise ValueError(
                f"Hadamard upper bound failed to decrease beyond its peak: {rows}")
    return rows
