"""Brute-force oracles used to freeze expected values in tests.

These stay independent of the code paths they check: LPs are solved by
enumerating basis subsystems (vertex enumeration), MILPs by exhaustive
enumeration of the integer lattice, and the diet family by enumerating
every integral purchase plan.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

FEAS_TOL = 1e-8


def lp_vertex_oracle(cost, rows, lower, upper):
    """min cost @ x over a *bounded* feasible region.

    Returns ("optimal", x, value) or ("infeasible", None, None). Every
    candidate vertex is the solution of n active planes chosen from the
    constraint rows (as equalities) and the finite bounds.
    """
    n = len(cost)
    planes: list[tuple[np.ndarray, float]] = []
    for coeffs, _, rhs in rows:
        planes.append((np.asarray(coeffs, dtype=float), float(rhs)))
    for j in range(n):
        if math.isfinite(lower[j]):
            e = np.zeros(n)
            e[j] = 1.0
            planes.append((e, float(lower[j])))
        if math.isfinite(upper[j]):
            e = np.zeros(n)
            e[j] = 1.0
            planes.append((e, float(upper[j])))

    best_x = None
    best_value = math.inf
    combos = list(itertools.combinations(range(len(planes)), n))
    a_stack = np.stack([[planes[i][0] for i in combo] for combo in combos])
    b_stack = np.array([[planes[i][1] for i in combo] for combo in combos])
    dets = np.linalg.det(a_stack)
    solvable = np.abs(dets) > 1e-10
    if solvable.any():
        xs = np.linalg.solve(a_stack[solvable], b_stack[solvable][..., None])[..., 0]
        for x in xs:
            if _feasible(x, rows, lower, upper):
                value = float(np.dot(cost, x))
                if value < best_value - 1e-12:
                    best_value = value
                    best_x = x
    if best_x is None:
        return "infeasible", None, None
    return "optimal", best_x, best_value


def _feasible(x, rows, lower, upper) -> bool:
    if np.any(x < np.asarray(lower) - FEAS_TOL) or np.any(x > np.asarray(upper) + FEAS_TOL):
        return False
    for coeffs, op, rhs in rows:
        value = float(np.dot(coeffs, x))
        if op == "<=" and value > rhs + FEAS_TOL:
            return False
        if op == ">=" and value < rhs - FEAS_TOL:
            return False
        if op == "==" and abs(value - rhs) > FEAS_TOL:
            return False
    return True


def milp_enumeration_oracle(cost, rows, lower, upper, int_mask, sense="min"):
    """Exhaustive enumeration over the integer lattice (continuous vars
    must be absent or fixed by equal bounds). Exact for integral data."""
    n = len(cost)
    ranges = []
    for j in range(n):
        if int_mask[j]:
            ranges.append(range(int(math.ceil(lower[j])), int(math.floor(upper[j])) + 1))
        else:
            if lower[j] != upper[j]:
                raise ValueError("enumeration oracle needs fixed continuous vars")
            ranges.append((lower[j],))
    best_x = None
    best_value = math.inf if sense == "min" else -math.inf
    optima = 0
    for point in itertools.product(*ranges):
        x = np.array(point, dtype=float)
        if not _feasible(x, rows, lower, upper):
            continue
        value = float(np.dot(cost, x))
        if sense == "min":
            better, tie = value < best_value, value == best_value
        else:
            better, tie = value > best_value, value == best_value
        if better:
            best_value, best_x, optima = value, x, 1
        elif tie:
            optima += 1
    if best_x is None:
        return "infeasible", None, None, 0
    return "optimal", best_x, best_value, optima


def diet_enumeration_oracle(costs, nutr_vals, min_nutr, max_nutr, max_qty):
    """Enumerate every integral purchase plan up to max_qty per food.

    costs: {food: cost}; nutr_vals: {(food, nutrition): value};
    min_nutr / max_nutr: {nutrition: level}. Returns
    (best_plan or None, best_cost, number_of_optimal_plans).
    """
    foods = list(costs)
    nutritions = list(min_nutr)
    best_plan = None
    best_cost = math.inf
    optima = 0
    for quantities in itertools.product(range(max_qty + 1), repeat=len(foods)):
        ok = True
        for nutrition in nutritions:
            total = sum(
                nutr_vals[(food, nutrition)] * qty for food, qty in zip(foods, quantities)
            )
            if total < min_nutr[nutrition] or total > max_nutr[nutrition]:
                ok = False
                break
        if not ok:
            continue
        plan_cost = sum(costs[food] * qty for food, qty in zip(foods, quantities))
        if plan_cost < best_cost:
            best_cost = plan_cost
            best_plan = dict(zip(foods, quantities))
            optima = 1
        elif plan_cost == best_cost:
            optima += 1
    return best_plan, best_cost, optima


# seeded random instance generators shared by the oracle suites


def random_bounded_lp(rng: np.random.Generator):
    n = int(rng.integers(2, 7))
    m = int(rng.integers(1, 7))
    cost = rng.integers(-9, 10, size=n).astype(float)
    lower = np.zeros(n)
    upper = rng.integers(2, 11, size=n).astype(float)
    rows = []
    anchor = rng.uniform(0, 1, size=n) * upper  # likely-feasible interior point
    for _ in range(m):
        coeffs = rng.integers(-5, 6, size=n).astype(float)
        op = rng.choice(["<=", ">=", "<=", "<="])
        slack = float(rng.uniform(0, 4))
        value = float(coeffs @ anchor)
        rhs = value + slack if op == "<=" else value - slack
        if rng.random() < 0.15:  # occasionally force likely infeasibility
            rhs = rhs - 50 if op == "<=" else rhs + 50
        rows.append((coeffs, op, round(rhs, 3)))
    return cost, rows, lower, upper


def random_knapsack(rng: np.random.Generator):
    n = int(rng.integers(5, 16))
    weights = rng.integers(1, 21, size=n).astype(float)
    values = rng.integers(1, 31, size=n).astype(float)
    capacity = float(int(weights.sum() * 0.4))
    rows = [(weights, "<=", capacity)]
    return -values, rows, np.zeros(n), np.ones(n), [True] * n  # minimize -value


def random_assignment(rng: np.random.Generator):
    agents = int(rng.integers(2, 4))
    tasks = int(rng.integers(2, 5))
    n = agents * tasks
    cost = rng.integers(1, 20, size=n).astype(float)
    rows = []
    for t in range(tasks):
        coeffs = np.zeros(n)
        for a in range(agents):
            coeffs[a * tasks + t] = 1.0
        rows.append((coeffs, "==", 1.0))
    for a in range(agents):
        coeffs = np.zeros(n)
        coeffs[a * tasks : (a + 1) * tasks] = 1.0
        rows.append((coeffs, "<=", float(rng.integers(1, tasks + 1))))
    return cost, rows, np.zeros(n), np.ones(n), [True] * n
