# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled backend for the hot 1-D kernels.

Bitwise twin of ``_kernels_py``: identical operation order, identical
infinity conventions.  Keep the two files in sync; ``tests/test_backends.py``
asserts exact agreement.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, isfinite, isinf

cnp.import_array()

BACKEND_NAME = "cython"


cdef Py_ssize_t _hull(const double[::1] x, const double[::1] v,
                      const Py_ssize_t[::1] idx, Py_ssize_t nidx,
                      Py_ssize_t[::1] hull) noexcept nogil:
    """Monotone-chain lower hull over the index subset; returns hull size."""
    cdef Py_ssize_t k, i, a, b, top = 0
    cdef double xi, vi, cross
    for k in range(nidx):
        i = idx[k]
        xi = x[i]
        vi = v[i]
        while top >= 2:
            a = hull[top - 2]
            b = hull[top - 1]
            cross = (x[b] - x[a]) * (vi - v[a]) - (xi - x[a]) * (v[b] - v[a])
            if cross <= 0.0:
                top -= 1
            else:
                break
        hull[top] = i
        top += 1
    return top


def envelope_1d(const double[::1] x, const double[::1] v):
    """Lower convex envelope; returns (env, support_indices)."""
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray env_arr = np.full(n, np.inf)
    cdef double[::1] env = env_arr
    cdef Py_ssize_t i, lo = -1, hi = -1, nidx = 0, nneg = 0

    idx_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] idx = idx_arr
    for i in range(n):
        if v[i] < INFINITY:
            if lo < 0:
                lo = i
            hi = i
            idx[nidx] = i
            nidx += 1
            if v[i] == -INFINITY:
                nneg += 1
    if nidx == 0:
        return env_arr, np.empty(0, dtype=np.int64)

    cdef Py_ssize_t k, a, b, m, top
    if nneg > 0:
        support = np.empty(nneg, dtype=np.int64)
        k = 0
        for i in range(lo, hi + 1):
            env[i] = -INFINITY
        for i in range(n):
            if v[i] == -INFINITY:
                support[k] = i
                k += 1
        return env_arr, support

    hull_arr = np.empty(nidx, dtype=np.intp)
    cdef Py_ssize_t[::1] hull = hull_arr
    top = _hull(x, v, idx, nidx, hull)

    cdef double slope, val
    for k in range(top):
        a = hull[k]
        env[a] = v[a]
        if k + 1 < top:
            b = hull[k + 1]
            if b > a + 1:
                slope = (v[b] - v[a]) / (x[b] - x[a])
                for m in range(a + 1, b):
                    val = v[a] + (x[m] - x[a]) * slope
                    if val > v[m]:
                        val = v[m]
                    env[m] = val
    return env_arr, hull_arr[:top].astype(np.int64)


def conjugate_1d(const double[::1] x, const double[::1] v, const double[::1] s):
    """Exact discrete conjugate g(s) = max_i (s*x_i - v_i) over finite nodes."""
    cdef Py_ssize_t n = x.shape[0], m = s.shape[0]
    cdef Py_ssize_t i, j
    for i in range(n):
        if v[i] == -INFINITY:
            return np.full(m, np.inf)
    cdef cnp.ndarray out_arr = np.empty(m)
    cdef double[::1] out = out_arr
    cdef double best, t, sj
    cdef bint any_finite = False
    for i in range(n):
        if isfinite(v[i]):
            any_finite = True
            break
    if not any_finite:
        out_arr[:] = -np.inf
        return out_arr
    with nogil:
        for j in range(m):
            sj = s[j]
            best = -INFINITY
            for i in range(n):
                if isfinite(v[i]):
                    t = sj * x[i] - v[i]
                    if t > best:
                        best = t
            out[j] = best
    return out_arr


def envelope_rows(const double[::1] x, const double[:, ::1] V):
    """Row-by-row lower convex envelope of a 2-D array."""
    cdef Py_ssize_t R = V.shape[0], n = V.shape[1]
    cdef cnp.ndarray out_arr = np.empty((R, n))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, i, k, a, b, m, top, lo, hi, nidx, nneg
    cdef double slope, val

    idx_arr = np.empty(n, dtype=np.intp)
    hull_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] idx = idx_arr
    cdef Py_ssize_t[::1] hull = hull_arr

    with nogil:
        for r in range(R):
            lo = -1
            hi = -1
            nidx = 0
            nneg = 0
            for i in range(n):
                out[r, i] = INFINITY
                if V[r, i] < INFINITY:
                    if lo < 0:
                        lo = i
                    hi = i
                    idx[nidx] = i
                    nidx += 1
                    if V[r, i] == -INFINITY:
                        nneg += 1
            if nidx == 0:
                continue
            if nneg > 0:
                for i in range(lo, hi + 1):
                    out[r, i] = -INFINITY
                continue
            top = _hull(x, V[r], idx, nidx, hull)
            for k in range(top):
                a = hull[k]
                out[r, a] = V[r, a]
                if k + 1 < top:
                    b = hull[k + 1]
                    if b > a + 1:
                        slope = (V[r, b] - V[r, a]) / (x[b] - x[a])
                        for m in range(a + 1, b):
                            val = V[r, a] + (x[m] - x[a]) * slope
                            if val > V[r, m]:
                                val = V[r, m]
                            out[r, m] = val
    return out_arr


def conjugate_rows(const double[::1] x, const double[:, ::1] V, const double[::1] s):
    """Row-by-row discrete conjugate of a 2-D array."""
    cdef Py_ssize_t R = V.shape[0], n = V.shape[1], m = s.shape[0]
    cdef cnp.ndarray out_arr = np.empty((R, m))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, i, j
    cdef double best, t, sj
    cdef bint has_neg, has_fin
    with nogil:
        for r in range(R):
            has_neg = False
            has_fin = False
            for i in range(n):
                if V[r, i] == -INFINITY:
                    has_neg = True
                    break
                if isfinite(V[r, i]):
                    has_fin = True
            if has_neg:
                for j in range(m):
                    out[r, j] = INFINITY
                continue
            if not has_fin:
                for j in range(m):
                    out[r, j] = -INFINITY
                continue
            for j in range(m):
                sj = s[j]
                best = -INFINITY
                for i in range(n):
                    if isfinite(V[r, i]):
                        t = sj * x[i] - V[r, i]
                        if t > best:
                            best = t
                out[r, j] = best
    return out_arr
