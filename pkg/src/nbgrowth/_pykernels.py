"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""

import numpy as np


def _rows(indptr):
    return np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))


def nb_matvec(indptr, indices, x, shift=0.0):
    n = len(indptr) - 1
    return np.bincount(_rows(indptr), weights=x[indices], minlength=n) + shift * x


def power_iterate(indptr, indices, x, shift, n_iter):
    """Apply x <- (B + shift*I) x / sum, ``n_iter`` times, in place."""
    rows = _rows(indptr)
    n = len(indptr) - 1
    for _ in range(n_iter):
        y = np.bincount(rows, weights=x[indices], minlength=n) + shift * x
        x[:] = y / y.sum()
    return x


def cw_bounds(indptr, indices, x, shift):
    """Min and max of ((B + shift*I) x)_i / x_i."""
    ratios = nb_matvec(indptr, indices, x, shift) / x
    return float(ratios.min()), float(ratios.max())
