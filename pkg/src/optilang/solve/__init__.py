"""Unified solver interface: triage, reference backends, status taxonomy.

Two reference backends live here: two-phase primal simplex for LP and
best-first branch-and-bound over LP relaxations for MILP. The document's
``Solver`` hint is honored when compatible; otherwise triage is purely
structural (any integer/binary variable routes to branch-and-bound).
"""

from __future__ import annotations

import math
import time

import numpy as np

from ..modeling import ConcreteModel
from .backend import KERNEL_BACKEND
from .branch_bound import ArrayProblem, branch_and_bound
from .outcome import IncompatibleHint, SolveOutcome, SolverChoice, SolverLimits, SolveStats, Status
from .simplex import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED, simplex_minimize

__all__ = [
    "IncompatibleHint",
    "KERNEL_BACKEND",
    "SolveOutcome",
    "SolverChoice",
    "SolverLimits",
    "SolveStats",
    "Status",
    "dump_lp",
    "solve",
    "solve_lp",
    "solve_milp",
    "triage",
]


def triage(model: ConcreteModel) -> SolverChoice:
    """Pick a backend: hint when present and compatible, else structure."""
    has_integer = any(v.vtype in ("I", "B") for v in model.variables)
    hint = model.solver_hint
    if hint == "lp":
        if has_integer:
            raise IncompatibleHint("solver hint 'lp' but the model has integer variables")
        return SolverChoice("simplex_lp", "hint")
    if hint == "milp":
        return SolverChoice("bnb_milp", "hint")
    return SolverChoice("bnb_milp" if has_integer else "simplex_lp", "triage")


def solve(model: ConcreteModel, limits: SolverLimits | None = None) -> SolveOutcome:
    limits = limits or SolverLimits()
    choice = triage(model)
    if choice.backend == "simplex_lp":
        outcome = solve_lp(model, limits)
    else:
        outcome = solve_milp(model, limits)
    outcome.choice = choice
    outcome.logs.insert(
        0, f"solver {choice.backend} selected via {choice.origin} (kernels: {KERNEL_BACKEND})"
    )
    return outcome


def solve_lp(model: ConcreteModel, limits: SolverLimits | None = None) -> SolveOutcome:
    limits = limits or SolverLimits()
    if any(v.vtype in ("I", "B") for v in model.variables):
        raise ValueError("solve_lp requires a purely continuous model")
    problem = ArrayProblem(model)
    logs: list[str] = []
    start = time.perf_counter()
    status, x, iterations = problem.solve_relaxation(problem.lower, problem.upper, limits)
    wall = time.perf_counter() - start
    stats = SolveStats(iterations=iterations, nodes=0, wall_time=wall)
    if status == OPTIMAL:
        assignment = _assignment(model, x)
        objective = model.objective.evaluate(assignment)
        logs.append(f"simplex optimal in {iterations} iterations")
        return SolveOutcome(Status.OPTIMAL, assignment, objective, logs, stats)
    if status == UNBOUNDED:
        logs.append("entering column admits no blocking ratio: objective is unbounded")
        return SolveOutcome(Status.UNBOUNDED, None, None, logs, stats)
    if status == INFEASIBLE:
        logs.append("phase 1 ended with positive artificial objective")
        logs.extend(diagnose_infeasibility(model, limits.feasibility_tol))
        return SolveOutcome(Status.INFEASIBLE, None, None, logs, stats)
    logs.append(f"iteration cap {limits.max_iterations} reached")
    assignment = _assignment(model, x) if x is not None else None
    objective = model.objective.evaluate(assignment) if assignment is not None else None
    return SolveOutcome(Status.EARLY_STOP, assignment, objective, logs, stats)


def solve_milp(model: ConcreteModel, limits: SolverLimits | None = None) -> SolveOutcome:
    limits = limits or SolverLimits()
    problem = ArrayProblem(model)
    logs: list[str] = []
    start = time.perf_counter()
    status, x, raw_stats = branch_and_bound(problem, limits, logs)
    wall = time.perf_counter() - start
    stats = SolveStats(
        iterations=raw_stats["iterations"], nodes=raw_stats["nodes"], wall_time=wall
    )
    if status == OPTIMAL:
        assignment = _assignment(model, x)
        objective = model.objective.evaluate(assignment)
        logs.append(f"tree exhausted after {stats.nodes} nodes: optimal")
        return SolveOutcome(Status.OPTIMAL, assignment, objective, logs, stats)
    if status == UNBOUNDED:
        logs.append("root relaxation unbounded")
        return SolveOutcome(Status.UNBOUNDED, None, None, logs, stats)
    if status == INFEASIBLE:
        logs.append("no leaf produced a feasible integral point")
        logs.extend(diagnose_infeasibility(model, limits.feasibility_tol))
        return SolveOutcome(Status.INFEASIBLE, None, None, logs, stats)
    if status == "incumbent_stop":
        assignment = _assignment(model, x)
        objective = model.objective.evaluate(assignment)
        return SolveOutcome(Status.SUBOPTIMAL, assignment, objective, logs, stats)
    return SolveOutcome(Status.EARLY_STOP, None, None, logs, stats)


def _assignment(model: ConcreteModel, x: np.ndarray) -> dict[int, float]:
    out: dict[int, float] = {}
    for v in model.variables:
        value = float(x[v.id])
        if v.vtype in ("I", "B"):
            value = float(round(value))
        out[v.id] = value
    return out


def diagnose_infeasibility(model: ConcreteModel, tol: float) -> list[str]:
    """Cheap certificates naming violated batches: single constraints
    impossible under variable bounds, and >=/<= pairs over identical
    terms whose windows do not intersect."""
    notes: list[str] = []
    lower = {v.id: v.lower for v in model.variables}
    upper = {v.id: v.upper for v in model.variables}
    for constraint in model.constraints:
        lo = hi = constraint.lhs.constant
        for vid, coeff in constraint.lhs.terms.items():
            a, b = coeff * lower[vid], coeff * upper[vid]
            lo += min(a, b)
            hi += max(a, b)
        impossible = (
            (constraint.op == "<=" and lo > tol)
            or (constraint.op == ">=" and hi < -tol)
            or (constraint.op == "==" and (lo > tol or hi < -tol))
        )
        if impossible:
            notes.append(f"constraint {constraint.name} cannot be satisfied within variable bounds")
    by_terms: dict[tuple, list] = {}
    for constraint in model.constraints:
        key = tuple(sorted(constraint.lhs.terms.items()))
        by_terms.setdefault(key, []).append(constraint)
    for group in by_terms.values():
        floors = [c for c in group if c.op == ">="]
        ceilings = [c for c in group if c.op == "<="]
        for ge in floors:
            for le in ceilings:
                # t >= -k_ge and t <= -k_le conflict when k_le > k_ge
                if le.lhs.constant > ge.lhs.constant + tol:
                    notes.append(f"constraints {ge.name} and {le.name} demand an empty interval")
    return notes


def check_assignment(model: ConcreteModel, assignment: dict[int, float], tol: float) -> list[str]:
    """Violated constraint/bound names at the given point (empty = feasible)."""
    violations = []
    for v in model.variables:
        value = assignment[v.id]
        if value < v.lower - tol or value > v.upper + tol:
            violations.append(f"bound {v.display}")
    for constraint in model.constraints:
        if not constraint.satisfied_by(assignment, tol):
            violations.append(f"constraint {constraint.name}")
    return violations


def dump_lp(model: ConcreteModel, path: str) -> None:
    """Plain-text standard form: one row per constraint (coefficients, op, rhs)."""
    lines = [f"# sense: {model.sense}", f"# objective: {_affine_text(model.objective, model)}"]
    for v in model.variables:
        lines.append(f"# var {v.display} {v.vtype} [{_num(v.lower)}, {_num(v.upper)}]")
    for constraint in model.constraints:
        terms = {vid: c for vid, c in constraint.lhs.terms.items()}
        body = " + ".join(
            f"{_num(coeff)}*{model.variables[vid].display}" for vid, coeff in sorted(terms.items())
        )
        rhs = -constraint.lhs.constant
        lines.append(f"{constraint.name}: {body or '0'} {constraint.op} {_num(rhs)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _affine_text(expr, model: ConcreteModel) -> str:
    parts = [f"{_num(coeff)}*{model.variables[vid].display}" for vid, coeff in sorted(expr.terms.items())]
    parts.append(_num(expr.constant))
    return " + ".join(parts)


def _num(value: float) -> str:
    if value == math.inf:
        return "inf"
    if value == -math.inf:
        return "-inf"
    if value == int(value):
        return str(int(value))
    return repr(value)
