# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Monte Carlo kernels: per-draw Gram builds and Cholesky factorizations.

Same contracts as ``_pure``; selected at import when the extension built.
Aggregates agree with the pure backend to floating-point tolerance, not
bitwise (different reduction orders).
"""

import numpy as np

cimport cython
from libc.math cimport INFINITY, NAN, log, sqrt


def capacity_half_logdet(x, double scale):
    """(1/2) log det(I + scale * X X^T) for each draw in a batch.

    ``x`` has shape (batch, n, d); the Gram matrix is built on the n-side.
    The matrix is I + PSD, so every Cholesky pivot is >= 1 and the
    factorization cannot fail.
    """
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"expected a (batch, n, d) array, got shape {arr.shape}")
    cdef double[:, :, ::1] xv = arr
    cdef Py_ssize_t b = xv.shape[0], n = xv.shape[1], d = xv.shape[2]
    out = np.empty(b, dtype=np.float64)
    cdef double[::1] ov = out
    work = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] w = work
    cdef Py_ssize_t k, i, j, t
    cdef double s, acc
    with nogil:
        for k in range(b):
            for i in range(n):
                for j in range(i + 1):
                    s = 0.0
                    for t in range(d):
                        s += xv[k, i, t] * xv[k, j, t]
                    w[i, j] = scale * s
                w[i, i] += 1.0
            acc = 0.0
            for i in range(n):
                for j in range(i):
                    s = w[i, j]
                    for t in range(j):
                        s -= w[i, t] * w[j, t]
                    w[i, j] = s / w[j, j]
                s = w[i, i]
                for t in range(i):
                    s -= w[i, t] * w[i, t]
                w[i, i] = sqrt(s)
                acc += log(w[i, i])
            ov[k] = acc
    return out


def lattice_draw_stats(eta, join_red, ladder_rel):
    """Per-draw metric statistics for a batch of lattice coordinate vectors.

    ``eta`` has shape (batch, size); ``join_red`` holds full-lattice element
    indices for the reduced (least-element-dropped) metric, shape (m, m) with
    m = size - 1. Returns (half_logdet, half_logdiag, ok): half the log
    determinant of the reduced metric (NaN where no jitter rung yields a
    positive-definite factorization), half the sum of log clipped diagonal
    entries, and the success mask.
    """
    eta_arr = np.ascontiguousarray(eta, dtype=np.float64)
    join_arr = np.ascontiguousarray(join_red, dtype=np.int32)
    ladder = np.ascontiguousarray(ladder_rel, dtype=np.float64)
    if eta_arr.ndim != 2:
        raise ValueError(f"expected a (batch, size) array, got shape {eta_arr.shape}")
    cdef Py_ssize_t b = eta_arr.shape[0], m = join_arr.shape[0]
    if join_arr.ndim != 2 or join_arr.shape[1] != m:
        raise ValueError("join_red must be a square index matrix")
    if m != eta_arr.shape[1] - 1:
        raise ValueError("join_red size must be eta dimension minus one")
    half_logdet = np.full(b, np.nan, dtype=np.float64)
    half_logdiag = np.empty(b, dtype=np.float64)
    ok = np.zeros(b, dtype=np.uint8)
    if m == 0:
        half_logdet[:] = 0.0
        half_logdiag[:] = 0.0
        ok[:] = 1
        return half_logdet, half_logdiag, ok.view(bool)
    cdef double[:, ::1] ev = eta_arr
    cdef const int[:, ::1] jv = join_arr
    cdef double[::1] lv = ladder
    cdef double[::1] det_v = half_logdet
    cdef double[::1] diag_v = half_logdiag
    cdef unsigned char[::1] ok_v = ok
    g_arr = np.empty((m, m), dtype=np.float64)
    w_arr = np.empty((m, m), dtype=np.float64)
    cdef double[:, ::1] g = g_arr
    cdef double[:, ::1] w = w_arr
    cdef Py_ssize_t n_ladder = lv.shape[0]
    cdef Py_ssize_t k, i, j, t, r
    cdef double s, acc, di, base, jit
    cdef bint good
    with nogil:
        for k in range(b):
            base = 0.0
            acc = 0.0
            for i in range(m):
                for j in range(i + 1):
                    g[i, j] = ev[k, jv[i, j]] - ev[k, i + 1] * ev[k, j + 1]
                di = g[i, i]
                if di < 0.0:
                    di = 0.0
                base += di
                if di == 0.0:
                    acc = -INFINITY
                elif acc != -INFINITY:
                    acc += log(di)
            diag_v[k] = 0.5 * acc
            base /= m
            for r in range(n_ladder):
                jit = lv[r] * base
                for i in range(m):
                    for j in range(i):
                        w[i, j] = g[i, j]
                    w[i, i] = g[i, i] + jit
                good = True
                acc = 0.0
                for i in range(m):
                    for j in range(i):
                        s = w[i, j]
                        for t in range(j):
                            s -= w[i, t] * w[j, t]
                        w[i, j] = s / w[j, j]
                    s = w[i, i]
                    for t in range(i):
                        s -= w[i, t] * w[i, t]
                    if s <= 0.0:
                        good = False
                        break
                    w[i, i] = sqrt(s)
                    acc += log(w[i, i])
                if good:
                    det_v[k] = acc
                    ok_v[k] = 1
                    break
    return half_logdet, half_logdiag, ok.view(bool)
