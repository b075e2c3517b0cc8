#!/usr/bin/env python3
"""Benchmark the compiled simplex kernels against the numpy fallback.

Runs identical seeded LP and MILP workloads under both backends (the
fallback is forced via OPTILANG_PURE_PYTHON=1 in a subprocess) and
prints a timing table. Pivot sequences are identical by construction,
so the comparison is purely about kernel speed.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json
import time

import numpy as np

from optilang.solve import KERNEL_BACKEND, SolverLimits
from optilang.solve.branch_bound import branch_and_bound, ArrayProblem
from optilang.solve.simplex import simplex_minimize
from optilang.exprs import AffineConstraint, AffineExpr
from optilang.modeling import ConcreteModel, VariableDef


def random_lp(rng, n, m):
    cost = rng.normal(size=n)
    rows = []
    anchor = rng.uniform(0.2, 0.8, size=n) * 10.0
    for _ in range(m):
        coeffs = rng.normal(size=n)
        rows.append((coeffs, "<=", float(coeffs @ anchor + rng.uniform(0.5, 3.0))))
    return cost, rows, np.zeros(n), np.full(n, 10.0)


def random_milp_model(rng, n):
    weights = rng.integers(1, 25, size=n).astype(float)
    values = rng.integers(1, 40, size=n).astype(float)
    capacity = float(int(weights.sum() * 0.35))
    variables = tuple(VariableDef(i, "x", (str(i),), "B", 0.0, 1.0) for i in range(n))
    objective = AffineExpr(0.0, {i: -float(v) for i, v in enumerate(values)})
    constraint = AffineConstraint(
        "cap", AffineExpr(-capacity, {i: float(w) for i, w in enumerate(weights)}), "<="
    )
    return ConcreteModel(variables, objective, "min", (constraint,), {})


def bench():
    limits = SolverLimits()
    results = {"backend": KERNEL_BACKEND, "cells": []}

    for n, m, trials in ((10, 10, 150), (30, 30, 60), (80, 60, 15)):
        rng = np.random.default_rng(1234)
        problems = [random_lp(rng, n, m) for _ in range(trials)]
        started = time.perf_counter()
        total_iters = 0
        for cost, rows, lo, hi in problems:
            _, _, iters = simplex_minimize(cost, rows, lo, hi, limits)
            total_iters += iters
        elapsed = time.perf_counter() - started
        results["cells"].append(
            {"kind": "lp", "size": f"{n}x{m}", "trials": trials,
             "seconds": elapsed, "pivots": total_iters}
        )

    for n, trials in ((14, 40), (20, 12)):
        rng = np.random.default_rng(4321)
        models = [random_milp_model(rng, n) for _ in range(trials)]
        started = time.perf_counter()
        total_nodes = 0
        for model in models:
            logs = []
            _, _, stats = branch_and_bound(ArrayProblem(model), limits, logs)
            total_nodes += stats["nodes"]
        elapsed = time.perf_counter() - started
        results["cells"].append(
            {"kind": "milp", "size": f"{n} bins", "trials": trials,
             "seconds": elapsed, "nodes": total_nodes}
        )

    print(json.dumps(results))


bench()
"""


def run_backend(pure: bool, repeats: int) -> list[dict]:
    env = dict(os.environ)
    env["OPTILANG_PURE_PYTHON"] = "1" if pure else "0"
    best: list[dict] | None = None
    for _ in range(repeats):
        out = subprocess.run(
            [sys.executable, "-c", WORKLOAD], env=env, capture_output=True, text=True, check=True
        )
        payload = json.loads(out.stdout.strip().splitlines()[-1])
        cells = payload["cells"]
        if best is None:
            best = cells
        else:
            for slot, cell in zip(best, cells):
                slot["seconds"] = min(slot["seconds"], cell["seconds"])
    assert best is not None
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3, help="Best-of-N timing.")
    args = parser.parse_args()

    compiled = run_backend(pure=False, repeats=args.repeats)
    fallback = run_backend(pure=True, repeats=args.repeats)

    print(f"{'workload':<14}{'size':<10}{'trials':>7}{'compiled s':>12}{'python s':>12}{'speedup':>9}")
    print("-" * 64)
    for c_cell, p_cell in zip(compiled, fallback):
        speedup = p_cell["seconds"] / c_cell["seconds"] if c_cell["seconds"] else float("inf")
        print(
            f"{c_cell['kind']:<14}{c_cell['size']:<10}{c_cell['trials']:>7}"
            f"{c_cell['seconds']:>12.4f}{p_cell['seconds']:>12.4f}{speedup:>9.2f}x"
        )
    work = "pivots/nodes"
    print(f"\nidentical work per backend ({work}):",
          all(c.get("pivots") == p.get("pivots") and c.get("nodes") == p.get("nodes")
              for c, p in zip(compiled, fallback)))


if __name__ == "__main__":
    main()
