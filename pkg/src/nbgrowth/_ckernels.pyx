# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for shifted power iteration on CSR 0/1 operators."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def nb_matvec(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
              const double[::1] x, double shift=0.0):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double acc
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] y = out
    for i in range(n):
        acc = shift * x[i]
        for p in range(indptr[i], indptr[i + 1]):
            acc += x[indices[p]]
        y[i] = acc
    return out


def power_iterate(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                  double[::1] x, double shift, Py_ssize_t n_iter):
    """Apply x <- (B + shift*I) x / sum, ``n_iter`` times, in place."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, p, it
    cdef double acc, total
    buf = np.empty(n, dtype=np.float64)
    cdef double[::1] y = buf
    for it in range(n_iter):
        total = 0.0
        for i in range(n):
            acc = shift * x[i]
            for p in range(indptr[i], indptr[i + 1]):
                acc += x[indices[p]]
            y[i] = acc
            total += acc
        for i in range(n):
            x[i] = y[i] / total
    return np.asarray(x)


def cw_bounds(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
              const double[::1] x, double shift):
    """Min and max of ((B + shift*I) x)_i / x_i."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double acc, ratio
    cdef double lo = float("inf")
    cdef double hi = -float("inf")
    for i in range(n):
        acc = shift * x[i]
        for p in range(indptr[i], indptr[i + 1]):
            acc += x[indices[p]]
        ratio = acc / x[i]
        if ratio < lo:
            lo = ratio
        if ratio > hi:
            hi = ratio
    return lo, hi
