"""Two-phase primal simplex with Bland's rule.

Works on a dense tableau; general variable bounds are handled by
shifting (finite lower), mirroring (finite upper only), or splitting
(free) into nonnegative columns. Bland's rule keeps the method
deterministic and cycle-free; the per-pivot arithmetic lives in the
kernel backend (compiled or numpy).
"""

from __future__ import annotations

import numpy as np

from .backend import kernels
from .outcome import SolverLimits

PIVOT_TOL = 1e-9

# internal status vocabulary for the array-level solver
OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"


def simplex_minimize(
    cost: np.ndarray,
    rows: list[tuple[np.ndarray, str, float]],
    lower: np.ndarray,
    upper: np.ndarray,
    limits: SolverLimits,
) -> tuple[str, np.ndarray | None, int]:
    """Minimize cost @ x subject to rows (coeffs, op, rhs) and bounds.

    Returns (status, x, iterations); x is None unless a feasible point
    was reached (optimal, or the iteration cap hit during phase 2).
    """
    n = cost.shape[0]
    if np.any(lower > upper):
        return INFEASIBLE, None, 0

    transforms, ncols, ub_rows = _plan_columns(lower, upper)

    std_rows: list[list] = []
    for coeffs, op, rhs in rows:
        y, delta = _to_y(coeffs, transforms, ncols, n)
        std_rows.append([y, op, rhs - delta])
    for col, ub in ub_rows:
        y = np.zeros(ncols)
        y[col] = 1.0
        std_rows.append([y, "<=", ub])
    for row in std_rows:
        if row[2] < 0:
            row[0] = -row[0]
            row[2] = -row[2]
            row[1] = {"<=": ">=", ">=": "<=", "==": "=="}[row[1]]

    m = len(std_rows)
    n_slack = sum(1 for r in std_rows if r[1] == "<=")
    n_surplus = sum(1 for r in std_rows if r[1] == ">=")
    n_art = sum(1 for r in std_rows if r[1] in (">=", "=="))
    art_start = ncols + n_slack + n_surplus
    width = art_start + n_art + 1

    tableau = np.zeros((m + 1, width))
    basis = np.zeros(m, dtype=np.int64)
    slack_col, surplus_col, art_col = ncols, ncols + n_slack, art_start
    for i, (y, op, rhs) in enumerate(std_rows):
        tableau[i, :ncols] = y
        tableau[i, -1] = rhs
        if op == "<=":
            tableau[i, slack_col] = 1.0
            basis[i] = slack_col
            slack_col += 1
        else:
            if op == ">=":
                tableau[i, surplus_col] = -1.0
                surplus_col += 1
            tableau[i, art_col] = 1.0
            basis[i] = art_col
            art_col += 1

    iterations = 0

    if n_art > 0:
        tableau[-1] = 0.0
        tableau[-1, art_start : width - 1] = 1.0
        _reduce_objective(tableau, basis)
        status, iterations = _iterate(tableau, basis, art_start, limits, iterations)
        if status == ITERATION_LIMIT:
            return ITERATION_LIMIT, None, iterations
        if status == UNBOUNDED:
            # phase-1 objective is bounded below by zero; only numerics get here
            raise ArithmeticError("phase-1 simplex reported unbounded")
        if -tableau[-1, -1] > 1e-7:
            return INFEASIBLE, None, iterations
        tableau, basis, m = _drive_out_artificials(tableau, basis, art_start)

    c_y, _ = _to_y(cost, transforms, ncols, n)
    tableau[-1] = 0.0
    tableau[-1, :ncols] = c_y
    _reduce_objective(tableau, basis)
    status, iterations = _iterate(tableau, basis, art_start, limits, iterations)

    if status == UNBOUNDED:
        return UNBOUNDED, None, iterations
    x = _extract(tableau, basis, transforms, ncols, n, lower, upper)
    if status == ITERATION_LIMIT:
        return ITERATION_LIMIT, x, iterations
    return OPTIMAL, x, iterations


def _plan_columns(lower: np.ndarray, upper: np.ndarray):
    transforms: list[tuple] = []
    ncols = 0
    ub_rows: list[tuple[int, float]] = []
    for j in range(lower.shape[0]):
        lo, hi = lower[j], upper[j]
        if np.isfinite(lo):
            transforms.append(("shift", ncols, lo))
            if np.isfinite(hi):
                ub_rows.append((ncols, hi - lo))
            ncols += 1
        elif np.isfinite(hi):
            transforms.append(("mirror", ncols, hi))
            ncols += 1
        else:
            transforms.append(("free", ncols, ncols + 1))
            ncols += 2
    return transforms, ncols, ub_rows


def _to_y(coeffs: np.ndarray, transforms: list[tuple], ncols: int, n: int):
    y = np.zeros(ncols)
    delta = 0.0
    for j in range(n):
        a = coeffs[j]
        if a == 0.0:
            continue
        kind = transforms[j][0]
        if kind == "shift":
            y[transforms[j][1]] += a
            delta += a * transforms[j][2]
        elif kind == "mirror":
            y[transforms[j][1]] -= a
            delta += a * transforms[j][2]
        else:
            y[transforms[j][1]] += a
            y[transforms[j][2]] -= a
    return y, delta


def _reduce_objective(tableau: np.ndarray, basis: np.ndarray) -> None:
    for i in range(basis.shape[0]):
        coef = tableau[-1, basis[i]]
        if coef != 0.0:
            tableau[-1] -= coef * tableau[i]


def _iterate(tableau, basis, limit_cols, limits: SolverLimits, iterations: int):
    while True:
        col = kernels.bland_entering(tableau[-1], limit_cols, PIVOT_TOL)
        if col < 0:
            return OPTIMAL, iterations
        row = kernels.ratio_leaving(tableau, col, basis, PIVOT_TOL)
        if row < 0:
            return UNBOUNDED, iterations
        if iterations >= limits.max_iterations:
            return ITERATION_LIMIT, iterations
        kernels.pivot(tableau, row, col)
        basis[row] = col
        iterations += 1


def _drive_out_artificials(tableau: np.ndarray, basis: np.ndarray, art_start: int):
    m = basis.shape[0]
    drop: list[int] = []
    for i in range(m):
        if basis[i] < art_start:
            continue
        piv_col = -1
        for j in range(art_start):
            if abs(tableau[i, j]) > PIVOT_TOL:
                piv_col = j
                break
        if piv_col >= 0:
            kernels.pivot(tableau, i, piv_col)
            basis[i] = piv_col
        else:
            drop.append(i)  # redundant row
    if drop:
        keep = [i for i in range(m) if i not in drop]
        tableau = np.ascontiguousarray(tableau[keep + [m]])
        basis = basis[np.array(keep, dtype=np.intp)] if keep else basis[:0]
        m = len(keep)
    return tableau, basis, m


def _extract(tableau, basis, transforms, ncols, n, lower, upper) -> np.ndarray:
    y = np.zeros(ncols)
    for i in range(basis.shape[0]):
        if basis[i] < ncols:
            y[basis[i]] = max(tableau[i, -1], 0.0)
    x = np.empty(n)
    for j, t in enumerate(transforms):
        if t[0] == "shift":
            x[j] = t[2] + y[t[1]]
        elif t[0] == "mirror":
            x[j] = t[2] - y[t[1]]
        else:
            x[j] = y[t[1]] - y[t[2]]
    # basic solutions are bound-feasible up to roundoff; snap exactly
    return np.clip(x, lower, upper)
