"""Acceptance suite: each test is one exit criterion, at its stated
tolerance and runtime budget. The terminal summary prints one pass/fail
line per criterion (see conftest)."""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

import oracles
from conftest import scripted_dir
from defects import ALL_INJECTORS
from optilang.documents import diff_documents, parse_model_yaml, serialize_model_yaml
from optilang.evaluation import (
    bernoulli_records,
    latency_percentiles,
    run_eval,
    valid_at_k,
)
from optilang.exprs import AffineConstraint, AffineExpr
from optilang.llm import LlmConfig, generate
from optilang.modeling import ConcreteModel, DataSet, VariableDef, bind_data, build_abstract
from optilang.reporting import emit_rows, parse_report_schema
from optilang.service import create_app
from optilang.solve import SolverLimits, Status, solve, solve_lp, solve_milp
from optilang.validate import validate_pipeline


class Budget:
    def __init__(self, seconds: float):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"runtime {self.elapsed:.2f}s over budget"


def test_criterion_1_golden_fixtures(fixtures_dir):
    with Budget(1.0):
        diet_text = (fixtures_dir / "diet_model.yaml").read_text()
        report = validate_pipeline(diet_text)
        assert report.verdict == "Valid"
        doc = report.document

        assert parse_model_yaml(serialize_model_yaml(doc)) == doc

        schema = parse_report_schema((fixtures_dir / "report_schema_diet.yaml").read_text(), doc)
        assert schema.tables[0].name == "Diet Solution"

        doubled_text = (fixtures_dir / "diet_model_doubled.yaml").read_text()
        doubled_report = validate_pipeline(doubled_text)
        assert doubled_report.verdict == "Valid"
        changes = diff_documents(doc, doubled_report.document)
        assert len(changes) == 1
        assert changes[0].path == "ConstraintBatch[max_nutr].generator"


def _diet_instance(rng: np.random.Generator, foods, nutritions):
    """Random feasible diet data: a witness plan generates the nutrition
    window, so the instance is feasible by construction."""
    costs = {food: float(rng.integers(1, 10)) for food in foods}
    nutr_vals = {
        (food, nutrition): float(rng.integers(1, 6)) for food in foods for nutrition in nutritions
    }
    witness = {food: int(rng.integers(1, 7)) for food in foods}
    min_nutr, max_nutr = {}, {}
    for nutrition in nutritions:
        achieved = sum(nutr_vals[(food, nutrition)] * witness[food] for food in foods)
        min_nutr[nutrition] = float(max(0.0, achieved - float(rng.integers(0, 4))))
        max_nutr[nutrition] = float(achieved + float(rng.integers(0, 5)))
    return costs, nutr_vals, min_nutr, max_nutr


def _diet_dataset(costs, nutr_vals, min_nutr, max_nutr) -> DataSet:
    return DataSet(
        {
            "costs": [((food,), (cost,)) for food, cost in costs.items()],
            "nutr_vals": [(pair, (value,)) for pair, value in nutr_vals.items()],
            "min_nutr": [((n,), (level,)) for n, level in min_nutr.items()],
            "max_nutr": [((n,), (level,)) for n, level in max_nutr.items()],
        }
    )


def test_criterion_2_diet_end_to_end(fixtures_dir):
    with Budget(10.0):
        doc = parse_model_yaml((fixtures_dir / "models" / "diet_capped.yaml").read_text())
        foods = ("bread", "milk", "eggs")
        nutritions = ("protein", "iron")
        # distinct generic costs keep the optimum unique (asserted below)
        costs = {"bread": 2.13, "milk": 3.47, "eggs": 4.79}
        nutr_vals = {
            ("bread", "protein"): 3.0,
            ("bread", "iron"): 1.0,
            ("milk", "protein"): 4.0,
            ("milk", "iron"): 2.0,
            ("eggs", "protein"): 6.0,
            ("eggs", "iron"): 1.0,
        }
        min_nutr = {"protein": 18.0, "iron": 7.0}
        max_nutr = {"protein": 40.0, "iron": 22.0}

        plan, best_cost, optima = oracles.diet_enumeration_oracle(
            costs, nutr_vals, min_nutr, max_nutr, max_qty=20
        )
        assert plan is not None and optima == 1, "oracle instance must have a unique optimum"

        concrete = bind_data(
            build_abstract(doc), _diet_dataset(costs, nutr_vals, min_nutr, max_nutr)
        )
        outcome = solve(concrete)
        assert outcome.status is Status.OPTIMAL
        assert outcome.objective == best_cost  # exact, same summation order

        schema = parse_report_schema((fixtures_dir / "report_schema_diet.yaml").read_text(), doc)
        rows = emit_rows(schema, concrete, outcome)
        assert {cells[0]: cells[1] for cells in (r.cells for r in rows)} == plan


def _array_model(cost, rows, lower, upper, vtypes, sense="min") -> ConcreteModel:
    variables = tuple(
        VariableDef(i, "x", (f"v{i}",), vtypes[i], float(lower[i]), float(upper[i]))
        for i in range(len(cost))
    )
    sign = 1.0 if sense == "min" else -1.0
    objective = AffineExpr(0.0, {i: float(c) * sign for i, c in enumerate(cost)})
    constraints = tuple(
        AffineConstraint(
            f"c{i}",
            AffineExpr(-float(rhs), {j: float(a) for j, a in enumerate(coeffs) if a != 0.0}),
            op,
        )
        for i, (coeffs, op, rhs) in enumerate(rows)
    )
    return ConcreteModel(variables, objective, sense, constraints, {})


def test_criterion_3_milp_oracle_suite():
    with Budget(60.0):
        rng = np.random.default_rng(31337)
        for index in range(100):
            maker = oracles.random_knapsack if index % 2 == 0 else oracles.random_assignment
            cost, rows, lower, upper, int_mask = maker(rng)
            status, _, value, _ = oracles.milp_enumeration_oracle(
                cost, rows, lower, upper, int_mask
            )
            model = _array_model(cost, rows, lower, upper, ["B"] * len(cost))
            outcome = solve_milp(model, SolverLimits())
            if status == "infeasible":
                assert outcome.status is Status.INFEASIBLE, f"instance {index}"
            else:
                assert outcome.status is Status.OPTIMAL, f"instance {index}"
                assert outcome.objective == value, f"instance {index}"


def test_criterion_4_lp_oracle_suite():
    with Budget(30.0):
        rng = np.random.default_rng(271828)
        solved = 0
        for index in range(100):
            cost, rows, lower, upper = oracles.random_bounded_lp(rng)
            expected_status, _, expected_value = oracles.lp_vertex_oracle(
                cost, rows, lower, upper
            )
            model = _array_model(cost, rows, lower, upper, ["C"] * len(cost))
            outcome = solve_lp(model, SolverLimits())
            if expected_status == "infeasible":
                assert outcome.status is Status.INFEASIBLE, f"instance {index}"
                continue
            solved += 1
            assert outcome.status is Status.OPTIMAL, f"instance {index}"
            assert outcome.objective == pytest.approx(expected_value, abs=1e-6), f"instance {index}"
            x = np.array([outcome.assignment[i] for i in range(len(cost))])
            assert np.all(x >= lower - 1e-7) and np.all(x <= upper + 1e-7)
            for coeffs, op, rhs in rows:
                value = float(coeffs @ x)
                if op == "<=":
                    assert value <= rhs + 1e-7
                elif op == ">=":
                    assert value >= rhs - 1e-7
                else:
                    assert abs(value - rhs) <= 1e-7
        assert solved >= 50  # the suite must mostly exercise the optimal path


def test_criterion_5_validator_detection(clean_model_texts):
    assert len(clean_model_texts) == 15
    for name, text in clean_model_texts.items():
        assert validate_pipeline(text).verdict == "Valid", name
    total = 0
    for injector in ALL_INJECTORS:
        for name, text in sorted(clean_model_texts.items()):
            defect = injector(text)
            report = validate_pipeline(defect.text)
            assert report.verdict != "Valid", (defect.defect_class, name)
            assert defect.check(report), (defect.defect_class, name)
            total += 1
    assert total >= 6 * 5


def test_criterion_6_what_if_relaxation(fixtures_dir, tmp_path):
    capped_text = (fixtures_dir / "models" / "diet_capped.yaml").read_text()
    doubled_text = capped_text.replace("<= self.max_nutr[j]", "<= 2*self.max_nutr[j]")
    doc = parse_model_yaml(capped_text)
    abstract = build_abstract(doc)
    foods = ("bread", "milk", "eggs")
    nutritions = ("protein", "iron")

    scenario = scripted_dir(tmp_path, [doubled_text] * 20)
    config = LlmConfig(backend="fixture", fixture_dir=str(scenario), max_attempts=1)
    from optilang.llm import make_client

    client = make_client(config)

    checked = 0
    for seed in range(20):
        rng = np.random.default_rng(9000 + seed)
        data = _diet_dataset(*_diet_instance(rng, foods, nutritions))
        before = solve(bind_data(abstract, data))
        assert before.status is Status.OPTIMAL, f"seed {seed} must be feasible by construction"

        result = generate(
            "Double the maximum nutrition levels in the model",
            config,
            mode="edit",
            original=doc,
            client=client,
        )
        assert result.final is not None
        after = solve(bind_data(build_abstract(result.final), data))
        assert after.status is Status.OPTIMAL
        assert after.objective <= before.objective + 1e-9, f"seed {seed}"
        checked += 1
    assert checked == 20


def test_criterion_7_valid_at_k_harness():
    records = bernoulli_records(10_000, 0.5, 5, seed=777)
    estimate = valid_at_k(records, 3)
    assert abs(estimate - 0.875) <= 0.02

    values = [valid_at_k(records, k) for k in (1, 2, 3, 4, 5)]
    assert values == sorted(values)

    stats = latency_percentiles([float(i) for i in range(1, 11)])
    assert (stats.p50, stats.p75, stats.p90) == (5.0, 8.0, 9.0)
    single = latency_percentiles([4.2])
    assert (single.mean, single.std, single.p50, single.p75, single.p90) == (4.2, 0.0, 4.2, 4.2, 4.2)
    skewed = latency_percentiles([2.0, 2.0, 2.0, 10.0])
    assert (skewed.mean, skewed.p50, skewed.p90) == (4.0, 2.0, 10.0)
    assert skewed.std == math.sqrt(12)


def test_criterion_8_eval_report_format(corpus_dir):
    runs = [
        run_eval(
            corpus_dir,
            models=["fixture-model", "alt-model"],
            temperatures=[0.1, 0.2],
            k=5,
            mode="create",
            seed=11,
        )
        for _ in range(2)
    ]
    assert runs[0].format_text() == runs[1].format_text()
    assert runs[0].to_json() == runs[1].to_json()

    text = runs[0].format_text()
    lines = text.splitlines()
    header = lines[0]
    for column in ("Model", "Temperature", "Valid@1", "Valid@3", "Valid@5",
                   "Ave.", "Std.", "P50", "P75", "P90"):
        assert column in header
    main_rows = lines[2 : lines.index("")]
    assert len(main_rows) == 4  # model x temperature rows


def test_criterion_9_service_contract(fixtures_dir, tmp_path):
    with Budget(10.0):
        diet_text = (fixtures_dir / "diet_model.yaml").read_text()
        doubled_text = (fixtures_dir / "diet_model_doubled.yaml").read_text()
        scenario = scripted_dir(tmp_path, [diet_text, doubled_text])
        config = LlmConfig(backend="fixture", fixture_dir=str(scenario), max_attempts=3)
        client = TestClient(create_app(config))
        payload = json.loads((fixtures_dir / "diet_data.json").read_text())

        assert client.get("/sessions/ghost").status_code == 404
        sid = client.post("/sessions").json()["id"]

        created = client.post(f"/sessions/{sid}/create", json={"query": "diet problem"})
        assert created.status_code == 200
        assert parse_model_yaml(created.json()["yaml"]) == parse_model_yaml(diet_text)

        accepted = client.put(f"/sessions/{sid}/data", json=payload)
        assert accepted.status_code == 200 and accepted.json()["errors"] == []

        solved = client.post(f"/sessions/{sid}/solve", json={})
        assert solved.status_code == 200
        first = solved.json()
        assert first["status"] == "Optimal"

        reported = client.get(f"/sessions/{sid}/report")
        assert reported.status_code == 200
        assert reported.json()["tables"][0]["rows"]

        history_before = client.get(f"/sessions/{sid}/history").json()["versions"]
        edited = client.post(
            f"/sessions/{sid}/edit",
            json={"query": "Double the maximum nutrition levels in the model"},
        )
        assert edited.status_code == 200
        assert edited.json()["diff"][0]["path"] == "ConstraintBatch[max_nutr].generator"

        resolved = client.post(f"/sessions/{sid}/solve", json={})
        assert resolved.status_code == 200
        second = resolved.json()
        assert second["status"] == "Optimal"
        assert second["objective"] <= first["objective"] + 1e-9

        history_after = client.get(f"/sessions/{sid}/history").json()["versions"]
        assert len(history_after) == len(history_before) + 1
        assert history_after[: len(history_before)] == history_before  # append-only
