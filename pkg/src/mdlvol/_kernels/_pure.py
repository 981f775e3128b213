"""Numpy implementations of the Monte Carlo hot loops (fallback backend).

Same signatures and semantics as the compiled `_core` module. The jitter
ladder is applied here as an exact eigenvalue shift: eig(G + j*I) =
eig(G) + j, so testing min-eigenvalue > 0 after the shift is the same
positive-definiteness condition the compiled path probes with a literal
Cholesky.
"""

import numpy as np


def capacity_half_logdet(x, scale):
    """Per-draw (1/2)*log det(I_N + scale * X Xᵀ) for a stack of designs.

    x : (B, N, D) float64 stack of design matrices.
    Returns a (B,) float64 array of half log-determinants.
    """
    x = np.asarray(x, dtype=np.float64)
    b, n, _ = x.shape
    # einsum (optimize off) keeps a fixed reduction order -> run-to-run
    # bit-stable regardless of BLAS threading
    gram = np.einsum("bij,bkj->bik", x, x)
    gram *= scale
    idx = np.arange(n)
    gram[:, idx, idx] += 1.0
    chol = np.linalg.cholesky(gram)
    return np.sum(np.log(chol[:, idx, idx]), axis=1)


def lattice_draw_stats(eta, join_red, ladder_rel):
    """Per-draw statistics of the reduced lattice metric G'(δ).

    eta : (B, D) float64 batch of expectation coordinates (eta[:, 0] == 1).
    join_red : (D-1, D-1) int32 full-lattice join indices for the reduced
        block (row/col 0 dropped), indexing into eta columns.
    ladder_rel : sequence of relative diagonal jitters (times trace/dim)
        tried in order before a draw is rejected.

    Returns (half_logdet, half_logdiag, ok):
      half_logdet[b]  = (1/2) log det G'   (nan where not ok)
      half_logdiag[b] = (1/2) Σ_i log G'_ii  (-inf allowed: zero diagonal)
      ok[b]           = False where no ladder rung gave a positive definite G'.
    """
    eta = np.asarray(eta, dtype=np.float64)
    b, d = eta.shape
    m = d - 1
    if m == 0:
        zero = np.zeros(b)
        return zero, zero.copy(), np.ones(b, dtype=bool)
    tail = eta[:, 1:]
    g = eta[:, np.asarray(join_red).reshape(-1)].reshape(b, m, m)
    g -= tail[:, :, None] * tail[:, None, :]
    # diagonal is η(1-η) >= 0 up to roundoff; clip so log gives -inf, not nan
    diag = np.clip(np.einsum("bii->bi", g), 0.0, None)
    with np.errstate(divide="ignore"):
        half_logdiag = 0.5 * np.sum(np.log(diag), axis=1)
    eigs = np.linalg.eigvalsh(g)
    base = np.sum(diag, axis=1) / m
    half_logdet = np.full(b, np.nan)
    ok = np.zeros(b, dtype=bool)
    for rel in ladder_rel:
        todo = np.flatnonzero(~ok)
        if todo.size == 0:
            break
        shifted = eigs[todo] + rel * base[todo, None]
        good = shifted[:, 0] > 0.0
        if np.any(good):
            rows = todo[good]
            half_logdet[rows] = 0.5 * np.sum(np.log(shifted[good]), axis=1)
            ok[rows] = True
    return half_logdet, half_logdiag, ok
