"""Pure-Python (numpy) fallback for the simplex tableau kernels.

Must stay pivot-for-pivot identical to the compiled kernels in
``_kernels.pyx``: same entering rule (Bland), same ratio test and
tie-break, same update arithmetic, so results do not depend on which
backend was importable.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_TIE_TOL = 1e-12


def bland_entering(obj_row: np.ndarray, ncols: int, tol: float) -> int:
    """Smallest column index with reduced cost < -tol, or -1."""
    idx = np.nonzero(obj_row[:ncols] < -tol)[0]
    return int(idx[0]) if idx.size else -1


def ratio_leaving(tableau: np.ndarray, col: int, basis: np.ndarray, tol: float) -> int:
    """Minimum-ratio row; ties broken on the smallest basis variable."""
    column = tableau[:-1, col]
    eligible = column > tol
    if not eligible.any():
        return -1
    ratios = np.full(column.shape[0], np.inf)
    ratios[eligible] = tableau[:-1, -1][eligible] / column[eligible]
    best = ratios.min()
    tied = np.nonzero(ratios <= best + _TIE_TOL)[0]
    return int(tied[np.argmin(basis[tied])])


def pivot(tableau: np.ndarray, row: int, col: int) -> None:
    """Gauss-Jordan step: normalize the pivot row, eliminate the column."""
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0
