from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defects import ALL_INJECTORS
from optilang.validate import (
    autocorrect,
    detect_redefinitions,
    detect_undefined,
    levenshtein,
    validate_pipeline,
)


class TestAutocorrect:
    def test_property_name_typo_fixed(self, diet_text):
        fixed, corrections = autocorrect(diet_text.replace("Objective:", "Objetive:"))
        assert "Objective:" in fixed
        assert [c.kind for c in corrections] == ["PropertyNameFixed"]
        assert corrections[0].before == "Objetive"
        assert corrections[0].after == "Objective"

    def test_fence_stripped(self, diet_text):
        fixed, corrections = autocorrect(f"```yaml\n{diet_text}```\n")
        assert [c.kind for c in corrections] == ["FenceStripped"]
        assert "```" not in fixed

    def test_distance_two_left_alone(self, diet_text):
        raw = diet_text.replace("Objective:", "Obj:")
        fixed, corrections = autocorrect(raw)
        assert corrections == []
        assert fixed == raw

    def test_ambiguous_enum_left_alone(self):
        text = "Objective:\n  desc: d\n  constructor: self.x['a']\n  sense: mn\n"
        # "mn" is within distance 1 of "min" only -> repaired;
        # single-letter vtype "X" matches C, I and B -> ambiguous, untouched
        fixed, corrections = autocorrect(text + "  vtype: X\n")
        assert any(c.kind == "EnumValueFixed" and c.after == "min" for c in corrections)
        assert "vtype: X" in fixed

    def test_vtype_case_canonicalized(self):
        fixed, corrections = autocorrect("  - vtype: i\n")
        assert "vtype: I" in fixed
        assert corrections[0].kind == "EnumValueFixed"

    def test_semicolon_and_paren_repair(self, diet_text):
        raw = diet_text.replace(
            "indices: list(self.costs.keys())", "indices: list(self.costs.keys();"
        )
        fixed, corrections = autocorrect(raw)
        assert "indices: list(self.costs.keys())" in fixed
        assert [c.kind for c in corrections] == ["ExpressionRepaired"]

    def test_multiline_expression_repair(self):
        raw = (
            "Objective:\n"
            "  desc: d\n"
            "  constructor: sum(self.costs[i] * self.buy[i] \\\n"
            "    for i in self.costs;\n"
            "  sense: min\n"
        )
        fixed, corrections = autocorrect(raw)
        assert corrections and corrections[0].kind == "ExpressionRepaired"
        assert ";" not in fixed.split("sense:")[0]

    def test_worst_case_is_identity(self):
        raw = "completely: unrelated\ncontent: here\n"
        fixed, corrections = autocorrect(raw)
        assert fixed == raw
        assert corrections == []

    @given(
        st.sampled_from(
            [
                ("Objetive:", "typo"),
                ("```\n", "fence"),
                (";", "semicolon"),
            ]
        )
    )
    @settings(max_examples=20, deadline=None)
    def test_idempotence(self, sample):
        from pathlib import Path

        text = (Path(__file__).parent / "fixtures" / "diet_model.yaml").read_text()
        marker, kind = sample
        if kind == "typo":
            raw = text.replace("Objective:", marker)
        elif kind == "fence":
            raw = f"```yaml\n{text}```\n"
        else:
            raw = text.replace(
                "indices: list(self.costs.keys())", "indices: list(self.costs.keys());"
            )
        once, first = autocorrect(raw)
        twice, second = autocorrect(once)
        assert second == []
        assert twice == once


class TestLevenshtein:
    @pytest.mark.parametrize(
        "a,b,expected",
        [("Objetive", "objective", 1), ("sense", "sense", 0), ("mni", "min", 2), ("kye", "key", 2)],
    )
    def test_distances(self, a, b, expected):
        assert levenshtein(a.lower(), b.lower()) == expected


class TestDetection:
    def test_diet_has_no_redefinitions(self, diet_doc):
        assert detect_redefinitions(diet_doc) == []

    def test_input_variable_clash(self, diet_text):
        doc_text = diet_text.replace("name: buy", "name: costs")
        report = validate_pipeline(doc_text)
        assert report.verdict == "Irreparable"
        (error,) = report.semantic_errors
        assert error.kind == "RedefinedVariable"
        assert error.name == "costs"
        assert set(error.locations) == {"InputData.costs", "VariableBatch[0]"}

    def test_two_batches_same_name(self, diet_doc):
        from optilang.documents import ModelDocument

        doubled = ModelDocument(
            diet_doc.input_data,
            diet_doc.variable_batches + diet_doc.variable_batches,
            diet_doc.objective,
            diet_doc.constraint_batches,
            None,
        )
        (error,) = detect_redefinitions(doubled)
        assert error.kind == "RedefinedVariable" and error.name == "buy"

    def test_diet_has_no_undefined(self, diet_doc):
        assert detect_undefined(diet_doc) == []

    def test_undefined_root_located(self, diet_text):
        broken = diet_text.replace(
            "sum(self.costs[i] * self.buy[i]", "sum(self.prices[i] * self.buy[i]"
        )
        report = validate_pipeline(broken)
        assert report.verdict == "Irreparable"
        (error,) = report.semantic_errors
        assert error.kind == "UndefinedVariable"
        assert error.name == "prices"
        assert error.locations == ("Objective.constructor",)

    def test_decision_variable_counts_as_defined(self, diet_text):
        # indices referencing the decision batch itself is legal
        text = diet_text.replace(
            "generator: (sum(self.nutr_vals[i, j] * self.buy[i] \\\n"
            "        for i in self.costs) >= self.min_nutr[j] \\\n"
            "        for j in self.min_nutr)",
            "generator: (self.buy[i] >= 0 for i in self.buy)",
        )
        report = validate_pipeline(text)
        assert report.verdict == "Valid"


class TestPipeline:
    def test_clean_diet_is_valid(self, diet_text):
        report = validate_pipeline(diet_text)
        assert report.verdict == "Valid"
        assert report.document is not None
        assert report.corrections == []

    def test_typo_is_repaired(self, diet_text):
        report = validate_pipeline(diet_text.replace("Objective:", "Objetive:"))
        assert report.verdict == "Repaired"
        assert len(report.corrections) == 1
        assert report.document is not None

    def test_soundness_of_embedded_document(self, diet_text):
        report = validate_pipeline(f"```yaml\n{diet_text}```")
        assert report.verdict == "Repaired"
        assert detect_redefinitions(report.document) == []
        assert detect_undefined(report.document) == []

    def test_unparseable_yaml_irreparable(self):
        report = validate_pipeline("::::not yaml::::[")
        assert report.verdict == "Irreparable"
        assert report.violations

    def test_report_json_shape(self, diet_text):
        payload = validate_pipeline(diet_text).to_json_dict()
        assert set(payload) == {"verdict", "corrections", "violations", "semantic_errors"}

    def test_zero_false_positives_on_clean_fixtures(self, clean_model_texts):
        assert len(clean_model_texts) == 15
        for name, text in clean_model_texts.items():
            assert validate_pipeline(text).verdict == "Valid", name

    @pytest.mark.parametrize("injector", ALL_INJECTORS, ids=lambda f: f.__name__)
    def test_injected_defects_flagged(self, injector, clean_model_texts):
        flagged = 0
        for name, text in sorted(clean_model_texts.items()):
            defect = injector(text)
            report = validate_pipeline(defect.text)
            assert report.verdict != "Valid", (injector.__name__, name)
            assert defect.check(report), (injector.__name__, name)
            flagged += 1
        assert flagged >= 5
