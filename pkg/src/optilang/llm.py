"""Prompt builders, completion clients, and the generate/validate loop.

Two client backends: a remote chat-completion endpoint (configured via
NL2OR_LLM_ENDPOINT / NL2OR_LLM_KEY) and a deterministic fixture client
for offline runs, with scripted (ordered responses) and corpus
(prompt-matched responses) modes.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Protocol

import requests

from .documents import ModelDocument, serialize_model_yaml
from .validate import ValidationReport, validate_pipeline

ENDPOINT_ENV = "NL2OR_LLM_ENDPOINT"
KEY_ENV = "NL2OR_LLM_KEY"

SCHEMA_OVERVIEW = """\
A model YAML document has these top-level sections, in this order:

InputData: a mapping from input name to a declaration with:
  desc: free-text description
  key: list of `field: type` entries naming the key columns
  value: list of `field: type` entries naming the value columns
  (scalar types: str, int, float, bool)

VariableBatch: a list of decision-variable batches, each with:
  desc, name, key, value (as above)
  indices: expression enumerating the batch keys, e.g. list(self.costs.keys())
  vtype: C (continuous), I (integer) or B (binary)
  lower_bound and upper_bound: numbers, or inf / -inf

Objective: exactly one, with:
  desc
  constructor: expression over the inputs and variables, e.g.
    sum(self.costs[i] * self.buy[i] for i in self.costs)
  sense: min or max

ConstraintBatch: a list of constraint batches, each with:
  desc, name
  generator: a comparison or a generator of comparisons, e.g.
    (sum(self.use[i, r] * self.make[i] for i in self.use) <= self.cap[r] for r in self.cap)

Solver: optional solver hint, one of lp, milp, auto.

Expressions may reference declared inputs and variables as self.<name>,
use + - * /, a single comparison (<=, >=, ==), the functions
sum/min/max/abs/len/list, the methods .keys()/.values()/.items(), and
generator expressions with for clauses and one optional trailing if."""

_CREATION_SYSTEM = (
    "You are an assistant that writes a YAML model document for an optimization "
    "process described by the user. The document must follow this format:\n\n"
    f"{SCHEMA_OVERVIEW}\n\n"
    "Use the worked examples in the request as format references. "
    "Output the YAML document only, with no commentary."
)

_EDIT_SYSTEM = (
    "You are an assistant that edits a YAML model document for an optimization "
    "process. The document must follow this format:\n\n"
    f"{SCHEMA_OVERVIEW}\n\n"
    "Apply exactly the change the user asks for, keeping everything else intact. "
    "Output the updated YAML document only, with no commentary."
)

_REPORT_SYSTEM = (
    "You are an assistant that designs a database schema for storing the solution "
    "of an optimization model. Answer with a YAML document of the form:\n\n"
    "tables:\n"
    "  - name: <table name>\n"
    "    desc: <what the table holds>\n"
    "    variable: <decision variable batch the rows come from>\n"
    "    columns:\n"
    "      - name: <column name>\n"
    "        type: <str|int|float|bool>\n"
    "        desc: <column description>\n"
    "        primary_key: true|false\n"
    "        value: <key or value field of the batch this column binds to>\n\n"
    "Mark at least one column per table as primary_key. "
    "Output the YAML document only, with no commentary."
)


class BackendUnavailable(RuntimeError):
    pass


class FixtureExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class CreationShot:
    problem: str
    answer_yaml: str


@dataclass(frozen=True)
class EditShot:
    problem: str
    original_yaml: str
    answer_yaml: str


@dataclass(frozen=True)
class Prompt:
    system: str
    user: str

    def messages(self) -> list[dict]:
        return [
            {"role": "system", "content": self.system},
            {"role": "user", "content": self.user},
        ]

    def render(self) -> str:
        return f"{self.system}\n\n{self.user}"


@dataclass
class LlmConfig:
    backend: str = "fixture"  # fixture | remote
    model: str = "fixture-model"
    temperature: float = 0.2
    max_attempts: int = 3
    fixture_dir: str | None = None
    fixture_mode: str = "scripted"  # scripted | corpus
    fixed_latency: float | None = None
    endpoint: str | None = None
    api_key: str | None = None
    timeout: float = 60.0
    retries: int = 2

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")
        if self.max_attempts < 1:
            raise ValueError("max attempts must be positive")
        if self.backend == "fixture" and not self.fixture_dir:
            raise ValueError("fixture backend requires a fixture directory")


@dataclass
class Attempt:
    raw: str
    report: ValidationReport
    latency: float

    def to_json_dict(self) -> dict:
        out = self.report.to_json_dict()
        out["latency"] = self.latency
        return out


@dataclass
class GenerationResult:
    attempts: list[Attempt] = field(default_factory=list)
    final: ModelDocument | None = None
    succeeded_at: int | None = None  # 1-based attempt index

    def to_json_dict(self) -> dict:
        return {
            "attempts": [a.to_json_dict() for a in self.attempts],
            "succeeded_at": self.succeeded_at,
        }


# prompt builders


def build_creation_prompt(query: str, shots: list[CreationShot]) -> Prompt:
    if not query.strip():
        raise ValueError("query must be non-empty")
    parts = ["Create a YAML file for an optimization process."]
    if shots:
        parts[0] += " Here is an example for the following problem:"
        for shot in shots:
            parts.append(f"Problem:\n{shot.problem.strip()}")
            parts.append(f"YAML file:\n{shot.answer_yaml.strip()}")
    parts.append(f"Problem:\n{query.strip()}")
    parts.append("YAML file:")
    return Prompt(_CREATION_SYSTEM, "\n\n".join(parts))


def build_edit_prompt(query: str, original: ModelDocument, shots: list[EditShot]) -> Prompt:
    if not query.strip():
        raise ValueError("query must be non-empty")
    parts = ["Based on a given query, update the original YAML, and output the updated YAML."]
    if shots:
        parts[0] += " Here are a few examples."
        for shot in shots:
            parts.append(f"Problem:\n{shot.problem.strip()}")
            parts.append(f"Original YAML:\n{shot.original_yaml.strip()}")
            parts.append(f"Updated YAML:\n{shot.answer_yaml.strip()}")
    parts.append(f"Problem:\n{query.strip()}")
    parts.append(f"Original YAML:\n{serialize_model_yaml(original).strip()}")
    parts.append("Updated YAML:")
    return Prompt(_EDIT_SYSTEM, "\n\n".join(parts))


def outcome_summary(outcome) -> str:
    """Privacy-safe solution summary for report prompts: status and model
    shape only. Objective values and assignments stay out - they derive
    from dataset values, which must never reach a prompt."""
    assigned = len(outcome.assignment) if outcome.assignment is not None else 0
    backend = outcome.choice.backend if outcome.choice else "unsolved"
    return f"status {outcome.status.value} via {backend}, {assigned} variables assigned"


def build_report_prompt(doc: ModelDocument, outcome_summary: str) -> Prompt:
    # only metadata crosses this boundary: batch names and field schemas,
    # never dataset values (the builder cannot even receive a DataSet)
    lines = [f"The optimization problem: {doc.objective.desc}", ""]
    lines.append("Decision variable batches to report on:")
    for batch in doc.variable_batches:
        keys = ", ".join(f"{f.name} ({f.type})" for f in batch.key)
        values = ", ".join(f"{f.name} ({f.type})" for f in batch.value)
        lines.append(f"- variable: {batch.name} | {batch.desc}")
        lines.append(f"  key fields: {keys}")
        lines.append(f"  value fields: {values}")
    lines.append("")
    lines.append(f"Solution summary: {outcome_summary}")
    lines.append("")
    lines.append("Database schema YAML:")
    return Prompt(_REPORT_SYSTEM, "\n".join(lines))


# completion clients


class CompletionClient(Protocol):
    def complete(self, prompt: Prompt, model: str, temperature: float) -> str: ...


class RemoteClient:
    """Chat-completion JSON over HTTP: request {model, temperature,
    messages}, response choices[0].message.content."""

    def __init__(self, config: LlmConfig):
        self.endpoint = config.endpoint or os.environ.get(ENDPOINT_ENV, "")
        self.api_key = config.api_key or os.environ.get(KEY_ENV, "")
        self.timeout = config.timeout
        self.retries = config.retries
        if not self.endpoint:
            raise BackendUnavailable(f"no endpoint configured (set {ENDPOINT_ENV})")

    def complete(self, prompt: Prompt, model: str, temperature: float) -> str:
        payload = {"model": model, "temperature": temperature, "messages": prompt.messages()}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = requests.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
                response.raise_for_status()
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(0.2 * (attempt + 1))
        raise BackendUnavailable(f"remote endpoint unreachable: {last_error}")


class ScriptedFixtureClient:
    """Plays back ``<dir>/responses/001.yaml, 002.yaml, ...`` in order."""

    def __init__(self, scenario_dir: str | Path):
        root = Path(scenario_dir)
        responses = root / "responses"
        if not responses.is_dir():
            raise FixtureExhausted(f"no responses directory under {root}")
        self._files = sorted(responses.iterdir())
        self._cursor = 0
        self._lock = threading.Lock()

    def complete(self, prompt: Prompt, model: str, temperature: float) -> str:
        with self._lock:
            if self._cursor >= len(self._files):
                raise FixtureExhausted(
                    f"scripted fixture has only {len(self._files)} responses"
                )
            path = self._files[self._cursor]
            self._cursor += 1
        return path.read_text(encoding="utf-8")


class CorpusFixtureClient:
    """Maps prompt digests to responses: ``<dir>/<name>/{prompt.txt,response.yaml}``."""

    def __init__(self, corpus_dir: str | Path):
        self._index: dict[str, Path] = {}
        for entry in sorted(Path(corpus_dir).iterdir()):
            prompt_file = entry / "prompt.txt"
            response_file = entry / "response.yaml"
            if prompt_file.is_file() and response_file.is_file():
                digest = _digest(prompt_file.read_text(encoding="utf-8"))
                self._index[digest] = response_file

    def complete(self, prompt: Prompt, model: str, temperature: float) -> str:
        digest = _digest(prompt.render())
        if digest not in self._index:
            raise FixtureExhausted("no corpus response for this prompt")
        return self._index[digest].read_text(encoding="utf-8")


def _digest(text: str) -> str:
    return hashlib.sha256(text.strip().encode("utf-8")).hexdigest()


def make_client(config: LlmConfig) -> CompletionClient:
    if config.backend == "remote":
        return RemoteClient(config)
    if config.backend == "fixture":
        assert config.fixture_dir is not None
        if config.fixture_mode == "corpus":
            return CorpusFixtureClient(config.fixture_dir)
        return ScriptedFixtureClient(config.fixture_dir)
    raise ValueError(f"unknown backend {config.backend!r}")


# generation loop


def run_attempt(
    query: str,
    config: LlmConfig,
    client: CompletionClient,
    mode: str = "create",
    original: ModelDocument | None = None,
    shots: list | None = None,
) -> Attempt:
    """One completion + validation round; latency covers both."""
    if mode == "edit":
        if original is None:
            raise ValueError("edit mode requires the original document")
        prompt = build_edit_prompt(query, original, shots if shots is not None else default_edit_shots())
    else:
        prompt = build_creation_prompt(
            query, shots if shots is not None else default_creation_shots()
        )
    started = time.perf_counter()
    raw = client.complete(prompt, config.model, config.temperature)
    report = validate_pipeline(raw)
    elapsed = time.perf_counter() - started
    latency = config.fixed_latency if config.fixed_latency is not None else elapsed
    return Attempt(raw, report, latency)


def generate(
    query: str,
    config: LlmConfig,
    mode: str = "create",
    original: ModelDocument | None = None,
    shots: list | None = None,
    client: CompletionClient | None = None,
) -> GenerationResult:
    """Up to ``max_attempts`` rounds, stopping at the first verdict that
    is not Irreparable."""
    client = client or make_client(config)
    result = GenerationResult()
    for attempt_index in range(1, config.max_attempts + 1):
        attempt = run_attempt(query, config, client, mode, original, shots)
        result.attempts.append(attempt)
        if attempt.report.verdict != "Irreparable":
            result.final = attempt.report.document
            result.succeeded_at = attempt_index
            break
    return result


# packaged few-shot bank


def default_creation_shots() -> list[CreationShot]:
    base = resources.files("optilang") / "shots" / "creation_diet"
    return [
        CreationShot(
            (base / "problem.txt").read_text(encoding="utf-8"),
            (base / "answer.yaml").read_text(encoding="utf-8"),
        )
    ]


def default_edit_shots() -> list[EditShot]:
    base = resources.files("optilang") / "shots" / "edit_diet"
    return [
        EditShot(
            (base / "problem.txt").read_text(encoding="utf-8"),
            (base / "original.yaml").read_text(encoding="utf-8"),
            (base / "answer.yaml").read_text(encoding="utf-8"),
        )
    ]
