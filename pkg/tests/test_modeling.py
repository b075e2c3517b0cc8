from __future__ import annotations

import json

import pytest

from optilang.documents import parse_model_yaml
from optilang.exprs import MissingDataPairError, lower_affine
from optilang.modeling import (
    ContractError,
    DataSet,
    DataSetError,
    ModelBuildError,
    bind_data,
    build_abstract,
    build_env,
    check_contract,
)


def drop_records(data: DataSet, name: str) -> DataSet:
    records = {k: list(v) for k, v in data.records.items()}
    records.pop(name)
    return DataSet(records)


class TestAbstract:
    def test_contract_mirrors_input_data(self, diet_doc):
        model = build_abstract(diet_doc)
        assert [e.name for e in model.contract] == ["max_nutr", "min_nutr", "nutr_vals", "costs"]
        nutr_vals = model.contract[2]
        assert [f.name for f in nutr_vals.key] == ["food", "nutrition"]
        assert [f.name for f in nutr_vals.value] == ["nutrition_value"]

    def test_empty_input_section(self, diet_doc):
        from optilang.documents import ModelDocument, ObjectiveDecl, VariableBatchDecl

        bare = ModelDocument(
            (),
            (),
            ObjectiveDecl("noop", "1 + 1", "min"),
            (),
            None,
        )
        assert build_abstract(bare).contract == ()

    def test_hint_passes_through(self, clean_model_texts):
        doc = parse_model_yaml(clean_model_texts["vertex_cover"])
        assert build_abstract(doc).solver_hint == "milp"


class TestContract:
    def test_conforming_dataset(self, diet_doc, diet_data):
        assert check_contract(build_abstract(diet_doc), diet_data) == []

    def test_missing_input(self, diet_doc, diet_data):
        errors = check_contract(build_abstract(diet_doc), drop_records(diet_data, "costs"))
        assert [(e.input, e.kind) for e in errors] == [("costs", "MissingInput")]
        assert errors[0].fatal

    def test_extra_input_not_fatal(self, diet_doc, diet_data):
        records = dict(diet_data.records)
        records["bonus"] = [(("x",), (1.0,))]
        errors = check_contract(build_abstract(diet_doc), DataSet(records))
        assert [(e.input, e.kind, e.fatal) for e in errors] == [("bonus", "ExtraInput", False)]

    def test_key_arity_mismatch(self, diet_doc, diet_data):
        records = {k: list(v) for k, v in diet_data.records.items()}
        records["nutr_vals"][0] = (("bread",), (3.0,))
        errors = check_contract(build_abstract(diet_doc), DataSet(records))
        assert any(e.input == "nutr_vals" and e.kind == "KeyArityMismatch" for e in errors)

    def test_type_mismatch(self, diet_doc, diet_data):
        records = {k: list(v) for k, v in diet_data.records.items()}
        records["costs"][0] = ((42,), (2.0,))
        errors = check_contract(build_abstract(diet_doc), DataSet(records))
        assert any(e.kind == "TypeMismatch" for e in errors)

    def test_duplicate_key(self, diet_doc, diet_data):
        records = {k: list(v) for k, v in diet_data.records.items()}
        records["costs"].append(records["costs"][0])
        errors = check_contract(build_abstract(diet_doc), DataSet(records))
        assert any(e.kind == "DuplicateKey" for e in errors)

    def test_int_widens_to_float(self, diet_doc, diet_data):
        records = {k: list(v) for k, v in diet_data.records.items()}
        records["costs"][0] = (("bread",), (2,))
        assert check_contract(build_abstract(diet_doc), DataSet(records)) == []


class TestDataSetJson:
    def test_round_trip(self, diet_data):
        again = DataSet.from_json_dict(diet_data.to_json_dict())
        assert again.records == diet_data.records

    def test_malformed_json(self):
        with pytest.raises(DataSetError):
            DataSet.from_json("{not json")

    def test_wrong_shape(self):
        with pytest.raises(DataSetError):
            DataSet.from_json(json.dumps({"costs": [{"key": "bread"}]}))


class TestBind:
    def test_diet_counts(self, diet_doc, diet_data):
        concrete = bind_data(build_abstract(diet_doc), diet_data)
        assert len(concrete.variables) == 3  # one per food
        assert len(concrete.constraints) == 4  # 2 min + 2 max
        assert len(concrete.objective.terms) == 3
        assert concrete.sense == "min"

    def test_variable_identity_and_display(self, diet_doc, diet_data):
        concrete = bind_data(build_abstract(diet_doc), diet_data)
        assert [v.id for v in concrete.variables] == [0, 1, 2]
        assert [v.display for v in concrete.variables] == [
            "buy[bread]",
            "buy[milk]",
            "buy[eggs]",
        ]
        assert all(v.vtype == "I" for v in concrete.variables)

    def test_minimal_instance(self, diet_doc):
        records = {
            "costs": [(("bread",), (2.0,))],
            "nutr_vals": [(("bread", "protein"), (3.0,))],
            "min_nutr": [(("protein",), (3.0,))],
            "max_nutr": [(("protein",), (30.0,))],
        }
        concrete = bind_data(build_abstract(diet_doc), DataSet(records))
        assert len(concrete.variables) == 1
        assert len(concrete.constraints) == 2

    def test_deterministic(self, diet_doc, diet_data):
        first = bind_data(build_abstract(diet_doc), diet_data)
        second = bind_data(build_abstract(diet_doc), diet_data)
        assert [v.display for v in first.variables] == [v.display for v in second.variables]
        assert first.objective == second.objective
        assert [c.name for c in first.constraints] == [c.name for c in second.constraints]
        assert [c.lhs for c in first.constraints] == [c.lhs for c in second.constraints]

    def test_fatal_contract_error_aborts(self, diet_doc, diet_data):
        with pytest.raises(ContractError) as err:
            bind_data(build_abstract(diet_doc), drop_records(diet_data, "nutr_vals"))
        assert err.value.errors[0].kind == "MissingInput"

    def test_missing_pair_error_policy(self, diet_doc, diet_data):
        records = {k: list(v) for k, v in diet_data.records.items()}
        records["nutr_vals"] = records["nutr_vals"][:-1]  # drop (eggs, iron)
        with pytest.raises(ModelBuildError) as err:
            bind_data(build_abstract(diet_doc), DataSet(records))
        assert isinstance(err.value.cause, MissingDataPairError)
        assert "eggs" in str(err.value.cause)

    def test_missing_pair_zero_policy(self, diet_doc, diet_data):
        records = {k: list(v) for k, v in diet_data.records.items()}
        records["nutr_vals"] = records["nutr_vals"][:-1]
        concrete = bind_data(build_abstract(diet_doc), DataSet(records), missing_policy="zero")
        iron = next(c for c in concrete.constraints if c.name == "min_nutr[iron]")
        assert 2 not in iron.lhs.terms  # eggs coefficient folded to zero

    def test_provenance_reproduces_constraints(self, diet_doc, diet_data):
        abstract = build_abstract(diet_doc)
        concrete = bind_data(abstract, diet_data)
        env = build_env(abstract, diet_data)
        generators = {b.name: b.generator for b in diet_doc.constraint_batches}
        from optilang.exprs import VarTable

        var_table = VarTable()
        mapping = var_table.add_batch("buy")
        for v in concrete.variables:
            mapping[v.key] = v.id
        for constraint in concrete.constraints:
            batch, binding = concrete.provenance[constraint.name]
            # substitute the recorded binding and lower the body independently
            inner = dict(binding)
            body = generators[batch]
            body = body[body.index("(") + 1 : body.rindex("for")].strip()
            rebound_env = env.child(inner)
            left, op, right = _split_comparison(body)
            lhs = lower_affine(left, rebound_env, var_table).sub(
                lower_affine(right, rebound_env, var_table)
            )
            assert lhs.terms == constraint.lhs.terms
            assert lhs.constant == pytest.approx(constraint.lhs.constant)

    def test_scaling_objective_data(self, diet_doc, diet_data):
        base = bind_data(build_abstract(diet_doc), diet_data)
        records = {k: list(v) for k, v in diet_data.records.items()}
        records["costs"] = [(key, (value[0] * 3.0,)) for key, value in records["costs"]]
        scaled = bind_data(build_abstract(diet_doc), DataSet(records))
        for vid, coeff in base.objective.terms.items():
            assert scaled.objective.terms[vid] == pytest.approx(3.0 * coeff)

    def test_zero_constraint_expansion_noted(self, diet_doc, diet_data):
        text = (
            "(self.buy[i] >= 0 for i in self.costs if self.costs[i] >= 1000)"
        )
        from optilang.documents import ConstraintBatchDecl, ModelDocument

        doc = ModelDocument(
            diet_doc.input_data,
            diet_doc.variable_batches,
            diet_doc.objective,
            (ConstraintBatchDecl("vacuous", "never fires", text),),
            None,
        )
        concrete = bind_data(build_abstract(doc), diet_data)
        assert concrete.constraints == ()
        assert any("vacuous" in note for note in concrete.notes)


def _split_comparison(text: str) -> tuple[str, str, str]:
    for op in ("<=", ">=", "=="):
        depth = 0
        for i, ch in enumerate(text):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif depth == 0 and text[i : i + 2] == op:
                return text[:i], op, text[i + 2 :]
    raise AssertionError(f"no comparison in {text!r}")
