# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simplex tableau kernels.

Pivot-for-pivot identical to ``_kernels_py``: same entering rule, ratio
test, tie-break, and update arithmetic (rows with an exactly zero factor
are skipped, which is a no-op in float arithmetic), so the two backends
produce the same iterates.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

cdef double _TIE_TOL = 1e-12


def bland_entering(double[::1] obj_row, Py_ssize_t ncols, double tol):
    cdef Py_ssize_t j
    for j in range(ncols):
        if obj_row[j] < -tol:
            return j
    return -1


def ratio_leaving(double[:, ::1] tableau, Py_ssize_t col, long long[::1] basis, double tol):
    cdef Py_ssize_t nrows = tableau.shape[0] - 1
    cdef Py_ssize_t last = tableau.shape[1] - 1
    cdef Py_ssize_t i, best_row = -1
    cdef double best = 0.0, ratio, coef
    cdef bint found = False

    for i in range(nrows):
        coef = tableau[i, col]
        if coef > tol:
            ratio = tableau[i, last] / coef
            if not found or ratio < best:
                best = ratio
                found = True
    if not found:
        return -1
    for i in range(nrows):
        coef = tableau[i, col]
        if coef > tol:
            ratio = tableau[i, last] / coef
            if ratio <= best + _TIE_TOL:
                if best_row < 0 or basis[i] < basis[best_row]:
                    best_row = i
    return best_row


def pivot(double[:, ::1] tableau, Py_ssize_t row, Py_ssize_t col):
    cdef Py_ssize_t nrows = tableau.shape[0]
    cdef Py_ssize_t ncols = tableau.shape[1]
    cdef Py_ssize_t i, j
    cdef double piv = tableau[row, col]
    cdef double factor

    for j in range(ncols):
        tableau[row, j] /= piv
    for i in range(nrows):
        if i == row:
            continue
        factor = tableau[i, col]
        if factor == 0.0:
            continue
        for j in range(ncols):
            tableau[i, j] -= factor * tableau[row, j]
    for i in range(nrows):
        tableau[i, col] = 0.0
    tableau[row, col] = 1.0
