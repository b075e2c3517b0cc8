"""Evaluation harness: Valid@k and latency statistics over a problem corpus.

Two Valid@k estimators are computed and labeled: the primary
"at least one valid generation within the first k attempts" (monotone in
k) and the secondary per-attempt mean validity over the first k attempts.
Latency percentiles are nearest-rank; std is the population deviation.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .documents import parse_model_yaml
from .llm import (
    BackendUnavailable,
    FixtureExhausted,
    LlmConfig,
    RemoteClient,
    ScriptedFixtureClient,
    run_attempt,
)


class InsufficientAttempts(ValueError):
    pass


class EmptySample(ValueError):
    pass


@dataclass(frozen=True)
class EvalRecord:
    problem_id: str
    mode: str  # create | edit
    attempts: tuple[tuple[bool, float], ...]  # (valid, latency seconds)
    model: str
    temperature: float


@dataclass(frozen=True)
class LatencyStats:
    mean: float
    std: float
    p50: float
    p75: float
    p90: float

    def to_json_dict(self) -> dict:
        return {"ave": self.mean, "std": self.std, "p50": self.p50, "p75": self.p75, "p90": self.p90}


@dataclass
class EvalSummary:
    model: str
    temperature: float
    n_problems: int
    valid_at: dict[int, float]
    mean_validity: dict[int, float]
    latency: LatencyStats | None
    error: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "temperature": self.temperature,
            "n_problems": self.n_problems,
            "valid_at": {str(k): v for k, v in self.valid_at.items()},
            "mean_validity": {str(k): v for k, v in self.mean_validity.items()},
            "latency": self.latency.to_json_dict() if self.latency else None,
            "error": self.error,
        }


@dataclass
class EvalReport:
    mode: str
    k: int
    seed: int
    ks: tuple[int, ...]
    rows: list[EvalSummary] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "mode": self.mode,
                "k": self.k,
                "seed": self.seed,
                "rows": [row.to_json_dict() for row in self.rows],
            },
            indent=2,
            sort_keys=True,
        )

    def format_text(self) -> str:
        return format_table(self.rows, self.ks)


def valid_at_k(records: list[EvalRecord], k: int) -> float:
    """Primary estimator: fraction of problems with >=1 valid attempt
    among the first k. Monotone nondecreasing in k."""
    if not records:
        raise EmptySample("no records")
    for record in records:
        if len(record.attempts) < k:
            raise InsufficientAttempts(
                f"problem {record.problem_id} has {len(record.attempts)} attempts, k={k}"
            )
    hits = sum(1 for r in records if any(valid for valid, _ in r.attempts[:k]))
    return hits / len(records)


def mean_validity_at_k(records: list[EvalRecord], k: int) -> float:
    """Secondary estimator: mean per-attempt validity over the first k."""
    if not records:
        raise EmptySample("no records")
    for record in records:
        if len(record.attempts) < k:
            raise InsufficientAttempts(
                f"problem {record.problem_id} has {len(record.attempts)} attempts, k={k}"
            )
    total = sum(sum(1 for valid, _ in r.attempts[:k] if valid) / k for r in records)
    return total / len(records)


def latency_percentiles(samples: list[float]) -> LatencyStats:
    """Nearest-rank percentiles: P_q = value at index ceil(q*n), 1-based."""
    if not samples:
        raise EmptySample("latency sample set is empty")
    ordered = sorted(samples)
    n = len(ordered)

    def rank(q: float) -> float:
        return ordered[max(math.ceil(q * n), 1) - 1]

    mean = sum(ordered) / n
    variance = sum((x - mean) ** 2 for x in ordered) / n
    return LatencyStats(mean, math.sqrt(variance), rank(0.50), rank(0.75), rank(0.90))


def bernoulli_records(
    n_problems: int, p: float, k: int, seed: int, latency: float = 0.0
) -> list[EvalRecord]:
    """Seeded mock: independent per-attempt success probability p."""
    rng = random.Random(seed)
    return [
        EvalRecord(
            problem_id=f"mock-{i:05d}",
            mode="create",
            attempts=tuple((rng.random() < p, latency) for _ in range(k)),
            model="mock",
            temperature=0.0,
        )
        for i in range(n_problems)
    ]


# corpus runner


@dataclass(frozen=True)
class CorpusProblem:
    problem_id: str
    directory: Path
    query: str
    original_yaml: str | None


def discover_corpus(corpus_dir: str | Path, mode: str) -> list[CorpusProblem]:
    """Problem directories: ``<id>/query.txt`` plus ``original.yaml`` for
    edit problems. The mode selects the matching subset."""
    problems = []
    for entry in sorted(Path(corpus_dir).iterdir()):
        query_file = entry / "query.txt"
        if not query_file.is_file():
            continue
        original_file = entry / "original.yaml"
        is_edit = original_file.is_file()
        if (mode == "edit") != is_edit:
            continue
        problems.append(
            CorpusProblem(
                entry.name,
                entry,
                query_file.read_text(encoding="utf-8"),
                original_file.read_text(encoding="utf-8") if is_edit else None,
            )
        )
    return problems


def evaluate_problem(problem: CorpusProblem, config: LlmConfig, k: int, mode: str) -> EvalRecord:
    """All k attempts are always run (records must be k long); generation
    state advances through one scripted client per problem."""
    if config.backend == "fixture":
        client = ScriptedFixtureClient(problem.directory)
    else:
        client = RemoteClient(config)
    original = parse_model_yaml(problem.original_yaml) if problem.original_yaml else None
    attempts = []
    for _ in range(k):
        attempt = run_attempt(problem.query, config, client, mode, original)
        attempts.append((attempt.report.verdict != "Irreparable", attempt.latency))
    return EvalRecord(problem.problem_id, mode, tuple(attempts), config.model, config.temperature)


def run_eval(
    corpus_dir: str | Path,
    models: list[str],
    temperatures: list[float],
    k: int = 5,
    mode: str = "create",
    seed: int = 0,
    parallel: int = 1,
    backend: str = "fixture",
    fixed_latency: float | None = 0.0,
    endpoint: str | None = None,
) -> EvalReport:
    """One summary row per model x temperature, shaped like the
    evaluation tables (Valid@1/3/5 plus Ave/Std/P50/P75/P90)."""
    problems = discover_corpus(corpus_dir, mode)
    ks = tuple(kk for kk in (1, 3, 5) if kk <= k)
    report = EvalReport(mode=mode, k=k, seed=seed, ks=ks)
    for model in models:
        for temperature in temperatures:
            config = LlmConfig(
                backend=backend,
                model=model,
                temperature=temperature,
                max_attempts=k,
                fixture_dir=str(corpus_dir) if backend == "fixture" else None,
                fixed_latency=fixed_latency,
                endpoint=endpoint,
            )
            try:
                records = _run_cell(problems, config, k, mode, parallel)
                latencies = [lat for r in records for _, lat in r.attempts]
                report.rows.append(
                    EvalSummary(
                        model=model,
                        temperature=temperature,
                        n_problems=len(records),
                        valid_at={kk: valid_at_k(records, kk) for kk in ks},
                        mean_validity={kk: mean_validity_at_k(records, kk) for kk in ks},
                        latency=latency_percentiles(latencies) if latencies else None,
                    )
                )
            except (BackendUnavailable, FixtureExhausted, EmptySample) as exc:
                report.rows.append(
                    EvalSummary(
                        model=model,
                        temperature=temperature,
                        n_problems=0,
                        valid_at={},
                        mean_validity={},
                        latency=None,
                        error=f"{type(exc).__name__}: {exc}",
                    )
                )
    return report


def _run_cell(
    problems: list[CorpusProblem], config: LlmConfig, k: int, mode: str, parallel: int
) -> list[EvalRecord]:
    if parallel <= 1:
        records = [evaluate_problem(p, config, k, mode) for p in problems]
    else:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            records = list(pool.map(lambda p: evaluate_problem(p, config, k, mode), problems))
    return sorted(records, key=lambda r: r.problem_id)


def format_table(rows: list[EvalSummary], ks: tuple[int, ...]) -> str:
    """Aligned text table; deterministic for identical inputs."""
    headers = ["Model", "Temperature"]
    headers += [f"Valid@{k}" for k in ks]
    headers += ["Ave.", "Std.", "P50", "P75", "P90"]

    def row_cells(row: EvalSummary) -> list[str]:
        if row.error:
            return [row.model, f"{row.temperature:g}", f"ERROR({row.error})"] + [""] * (
                len(headers) - 3
            )
        lat = row.latency
        cells = [row.model, f"{row.temperature:g}"]
        cells += [f"{row.valid_at[k]:.2f}" for k in ks]
        cells += [
            f"{lat.mean:.2f}",
            f"{lat.std:.2f}",
            f"{lat.p50:.2f}",
            f"{lat.p75:.2f}",
            f"{lat.p90:.2f}",
        ]
        return cells

    table = [headers] + [row_cells(r) for r in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip() for line in table]
    lines.insert(1, "-" * len(lines[0]))

    secondary = ["", "Per-attempt mean validity (secondary estimator)"]
    sec_headers = ["Model", "Temperature"] + [f"Mean@{k}" for k in ks]
    sec_table = [sec_headers]
    for row in rows:
        if row.error:
            sec_table.append([row.model, f"{row.temperature:g}"] + ["-"] * len(ks))
        else:
            sec_table.append(
                [row.model, f"{row.temperature:g}"]
                + [f"{row.mean_validity[k]:.2f}" for k in ks]
            )
    sec_widths = [max(len(line[i]) for line in sec_table) for i in range(len(sec_headers))]
    secondary += [
        "  ".join(cell.ljust(sec_widths[i]) for i, cell in enumerate(line)).rstrip()
        for line in sec_table
    ]
    return "\n".join(lines + secondary) + "\n"
