"""Best-first branch-and-bound over LP relaxations.

Branches on the most-fractional integer variable, splitting its bounds
at floor/ceil. Node order is by relaxation bound (best-first), with a
monotone counter as the deterministic tie-break.
"""

from __future__ import annotations

import heapq
import time

import numpy as np

from .outcome import SolverLimits
from .simplex import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED, simplex_minimize


class ArrayProblem:
    """ConcreteModel flattened to arrays, minimize orientation."""

    def __init__(self, model):
        n = len(model.variables)
        self.n = n
        sign = 1.0 if model.sense == "min" else -1.0
        self.sign = sign
        cost = np.zeros(n)
        for vid, coeff in model.objective.terms.items():
            cost[vid] = coeff * sign
        self.cost = cost
        self.offset = model.objective.constant * sign
        self.rows = []
        for constraint in model.constraints:
            coeffs = np.zeros(n)
            for vid, coeff in constraint.lhs.terms.items():
                coeffs[vid] = coeff
            self.rows.append((coeffs, constraint.op, -constraint.lhs.constant))
        self.lower = np.array([v.lower for v in model.variables], dtype=float)
        self.upper = np.array([v.upper for v in model.variables], dtype=float)
        self.int_mask = np.array([v.vtype in ("I", "B") for v in model.variables])
        for vid, v in enumerate(model.variables):
            if v.vtype == "B":
                self.lower[vid] = max(self.lower[vid], 0.0)
                self.upper[vid] = min(self.upper[vid], 1.0)

    def solve_relaxation(self, lower, upper, limits):
        return simplex_minimize(self.cost, self.rows, lower, upper, limits)

    def objective_of(self, x: np.ndarray) -> float:
        return float(self.cost @ x + self.offset)


def branch_and_bound(
    problem: ArrayProblem, limits: SolverLimits, logs: list[str]
) -> tuple[str, np.ndarray | None, dict]:
    """Returns (status, x, stats); status uses the simplex vocabulary plus
    'node_limit' / 'time_limit' markers resolved by the caller."""
    start = time.perf_counter()
    stats = {"nodes": 0, "iterations": 0}
    incumbent: np.ndarray | None = None
    incumbent_obj = np.inf
    counter = 0
    heap: list[tuple[float, int, np.ndarray, np.ndarray]] = [
        (-np.inf, counter, problem.lower.copy(), problem.upper.copy())
    ]
    stop_reason = None

    while heap:
        if stats["nodes"] >= limits.max_nodes:
            stop_reason = "node_limit"
            break
        if time.perf_counter() - start > limits.time_budget:
            stop_reason = "time_limit"
            break
        bound, _, lower, upper = heapq.heappop(heap)
        if incumbent is not None and bound >= incumbent_obj - 1e-9:
            break  # best-first: every open node is at least this bound
        status, x, iters = problem.solve_relaxation(lower, upper, limits)
        stats["nodes"] += 1
        stats["iterations"] += iters
        if status == INFEASIBLE:
            continue
        if status == UNBOUNDED:
            if stats["nodes"] == 1:
                return UNBOUNDED, None, stats
            continue
        if status == ITERATION_LIMIT:
            stop_reason = "iteration_limit"
            break
        assert x is not None
        relax_obj = problem.objective_of(x)
        if incumbent is not None and relax_obj >= incumbent_obj - 1e-9:
            continue
        fractional = _most_fractional(x, problem.int_mask, limits.integrality_tol)
        if fractional is None:
            candidate = _round_integral(x, problem.int_mask, lower, upper)
            candidate_obj = problem.objective_of(candidate)
            if candidate_obj < incumbent_obj:
                incumbent, incumbent_obj = candidate, candidate_obj
            continue
        value = x[fractional]
        down_upper = upper.copy()
        down_upper[fractional] = np.floor(value)
        up_lower = lower.copy()
        up_lower[fractional] = np.ceil(value)
        for child_lower, child_upper in ((lower, down_upper), (up_lower, upper)):
            if child_lower[fractional] <= child_upper[fractional]:
                counter += 1
                heapq.heappush(heap, (relax_obj, counter, child_lower.copy(), child_upper.copy()))

    if stop_reason is None:
        if incumbent is None:
            return INFEASIBLE, None, stats
        return OPTIMAL, incumbent, stats

    if incumbent is not None:
        open_bound = min((entry[0] for entry in heap), default=incumbent_obj)
        gap = incumbent_obj - open_bound
        logs.append(
            f"stopped by {stop_reason}: incumbent objective {incumbent_obj:.6g}, "
            f"bound gap {max(gap, 0.0):.6g}"
        )
        return "incumbent_stop", incumbent, stats
    logs.append(f"stopped by {stop_reason} before any incumbent was found")
    return "early_stop", None, stats


def _most_fractional(x, int_mask, tol) -> int | None:
    best_j = None
    best_frac = tol
    for j in np.nonzero(int_mask)[0]:
        frac = abs(x[j] - round(x[j]))
        if frac > best_frac:
            best_frac = frac
            best_j = int(j)
    return best_j


def _round_integral(x, int_mask, lower, upper) -> np.ndarray:
    out = x.copy()
    out[int_mask] = np.round(out[int_mask])
    return np.clip(out, lower, upper)
