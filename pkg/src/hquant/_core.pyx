# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the hot loops: Householder chains and popcounts.

Mirrors ``hquant._reference``; ``hquant._backend`` picks whichever is
available at import time.
"""

import numpy as np


cdef unsigned char POP[256]


cdef void _init_pop() noexcept:
    cdef int i, x, c
    for i in range(256):
        x = i
        c = 0
        while x:
            c += x & 1
            x >>= 1
        POP[i] = <unsigned char> c


_init_pop()


cdef inline double _dot(const double* a, const double* b, Py_ssize_t k) noexcept nogil:
    # four accumulators to break the FP add latency chain
    cdef Py_ssize_t j = 0
    cdef double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0
    while j + 4 <= k:
        a0 += a[j] * b[j]
        a1 += a[j + 1] * b[j + 1]
        a2 += a[j + 2] * b[j + 2]
        a3 += a[j + 3] * b[j + 3]
        j += 4
    while j < k:
        a0 += a[j] * b[j]
        j += 1
    return (a0 + a1) + (a2 + a3)


def apply_reflections(const double[:, ::1] vectors, double[:, ::1] x):
    """Rows of ``x`` become H(v_1)...H(v_m) @ row, v_m acting first. In place."""
    cdef Py_ssize_t m = vectors.shape[0], n = x.shape[0], k = x.shape[1]
    cdef Py_ssize_t i, r, j
    cdef double nv, coef
    cdef const double* v
    cdef double* row
    with nogil:
        for i in range(m - 1, -1, -1):
            v = &vectors[i, 0]
            nv = _dot(v, v, k)
            for r in range(n):
                row = &x[r, 0]
                coef = 2.0 * _dot(v, row, k) / nv
                for j in range(k):
                    row[j] -= coef * v[j]


def record_reflections(const double[:, ::1] vectors, const double[:, ::1] x):
    """Forward pass keeping every intermediate; see the NumPy twin for layout."""
    cdef Py_ssize_t m = vectors.shape[0], n = x.shape[0], k = x.shape[1]
    acts_arr = np.empty((m + 1, n, k), dtype=np.float64)
    cdef double[:, :, ::1] acts = acts_arr
    cdef Py_ssize_t i, r, j
    cdef double nv, coef
    cdef const double* v
    cdef double* src
    cdef double* dst
    with nogil:
        for r in range(n):
            for j in range(k):
                acts[m, r, j] = x[r, j]
        for i in range(m - 1, -1, -1):
            v = &vectors[i, 0]
            nv = _dot(v, v, k)
            for r in range(n):
                src = &acts[i + 1, r, 0]
                dst = &acts[i, r, 0]
                coef = 2.0 * _dot(v, src, k) / nv
                for j in range(k):
                    dst[j] = src[j] - coef * v[j]
    return acts_arr


def backprop_reflections(const double[:, ::1] vectors,
                         const double[:, :, ::1] acts,
                         const double[:, ::1] grad_out):
    """Gradients w.r.t. every reflection vector and the pre-rotation rows."""
    cdef Py_ssize_t m = vectors.shape[0], n = grad_out.shape[0], k = grad_out.shape[1]
    vgrads_arr = np.zeros((m, k), dtype=np.float64)
    gin_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] vg = vgrads_arr
    cdef double[:, ::1] g = gin_arr
    cdef Py_ssize_t i, r, j
    cdef double nv, s, gv, acc, coef
    cdef const double* v
    cdef const double* xr
    cdef double* gr
    cdef double* vgi
    with nogil:
        for r in range(n):
            for j in range(k):
                g[r, j] = grad_out[r, j]
        for i in range(m):
            v = &vectors[i, 0]
            nv = _dot(v, v, k)
            vgi = &vg[i, 0]
            acc = 0.0
            for r in range(n):
                xr = &acts[i + 1, r, 0]
                gr = &g[r, 0]
                s = _dot(v, xr, k)
                gv = _dot(v, gr, k)
                acc += s * gv
                for j in range(k):
                    vgi[j] -= (2.0 / nv) * (gv * xr[j] + s * gr[j])
                coef = 2.0 * gv / nv
                for j in range(k):
                    gr[j] -= coef * v[j]
            coef = 4.0 * acc / (nv * nv)
            for j in range(k):
                vgi[j] += coef * v[j]
    return vgrads_arr, gin_arr


def hamming_counts(const unsigned char[::1] query,
                   const unsigned char[:, ::1] db,
                   unsigned char last_mask):
    """Popcount of XOR between one packed row and each db row, pad bits masked."""
    cdef Py_ssize_t n = db.shape[0], nb = db.shape[1]
    out_arr = np.empty(n, dtype=np.uint64)
    cdef unsigned long long[::1] out = out_arr
    cdef const unsigned char* q = &query[0]
    cdef Py_ssize_t r, j
    cdef unsigned long long total
    with nogil:
        for r in range(n):
            total = 0
            for j in range(nb - 1):
                total += POP[db[r, j] ^ q[j]]
            total += POP[(db[r, nb - 1] ^ q[nb - 1]) & last_mask]
            out[r] = total
    return out_arr
