from __future__ import annotations

import re
from pathlib import Path

import pytest

from optilang.documents import parse_model_yaml
from optilang.modeling import DataSet

_CRITERION_RE = re.compile(r"test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion when the suite ran."""
    outcomes: dict[int, str] = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            match = _CRITERION_RE.search(nodeid)
            if match:
                number = int(match.group(1))
                verdict = "PASS" if status == "passed" else "FAIL"
                if outcomes.get(number) != "FAIL":
                    outcomes[number] = verdict
    if outcomes:
        terminalreporter.section("acceptance criteria")
        for number in sorted(outcomes):
            terminalreporter.write_line(f"criterion {number}: {outcomes[number]}")

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = Path(__file__).parent.parent / "corpus"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def diet_text() -> str:
    return (FIXTURES / "diet_model.yaml").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def diet_doubled_text() -> str:
    return (FIXTURES / "diet_model_doubled.yaml").read_text(encoding="utf-8")


@pytest.fixture()
def diet_doc(diet_text):
    return parse_model_yaml(diet_text)


@pytest.fixture()
def diet_doubled_doc(diet_doubled_text):
    return parse_model_yaml(diet_doubled_text)


@pytest.fixture(scope="session")
def diet_data_text() -> str:
    return (FIXTURES / "diet_data.json").read_text(encoding="utf-8")


@pytest.fixture()
def diet_data(diet_data_text) -> DataSet:
    return DataSet.from_json(diet_data_text)


@pytest.fixture(scope="session")
def clean_model_texts() -> dict[str, str]:
    return {
        path.stem: path.read_text(encoding="utf-8")
        for path in sorted((FIXTURES / "models").glob("*.yaml"))
    }


def scripted_dir(tmp_path: Path, responses: list[str]) -> Path:
    """Materialize a scripted fixture scenario under tmp_path."""
    scenario = tmp_path / "scenario"
    (scenario / "responses").mkdir(parents=True)
    for i, body in enumerate(responses, 1):
        (scenario / "responses" / f"{i:03d}.yaml").write_text(body, encoding="utf-8")
    return scenario
