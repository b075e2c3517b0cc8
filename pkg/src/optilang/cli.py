"""Command-line entry points for headless pipeline use."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .documents import DocumentError, diff_documents, parse_model_yaml, serialize_model_yaml
from .evaluation import run_eval
from .llm import BackendUnavailable, FixtureExhausted, LlmConfig, generate
from .modeling import ContractError, DataSet, DataSetError, ModelBuildError, bind_data, build_abstract
from .reporting import default_schema, emit_rows, parse_report_schema, persist
from .solve import IncompatibleHint, SolverLimits, dump_lp, solve


def _fail(kind: str, message: str, code: int = 1) -> None:
    click.echo(f"error[{kind}]: {message}", err=True)
    sys.exit(code)


def _llm_options(fn):
    fn = click.option("--llm-backend", type=click.Choice(["remote", "fixture"]), default="fixture", show_default=True)(fn)
    fn = click.option("--fixture-dir", type=click.Path(), default=None, help="Scenario directory for the fixture backend.")(fn)
    fn = click.option("--fixture-mode", type=click.Choice(["scripted", "corpus"]), default="scripted", show_default=True)(fn)
    fn = click.option("--llm-model", default="fixture-model", show_default=True, help="Completion model name.")(fn)
    fn = click.option("--temperature", type=float, default=0.2, show_default=True)(fn)
    fn = click.option("--attempts", "-k", type=int, default=3, show_default=True, help="Generation attempts before giving up.")(fn)
    fn = click.option("--endpoint", default=None, help="Remote completion endpoint (or NL2OR_LLM_ENDPOINT).")(fn)
    return fn


def _build_config(llm_backend, fixture_dir, fixture_mode, llm_model, temperature, attempts, endpoint) -> LlmConfig:
    try:
        return LlmConfig(
            backend=llm_backend,
            model=llm_model,
            temperature=temperature,
            max_attempts=attempts,
            fixture_dir=fixture_dir,
            fixture_mode=fixture_mode,
            endpoint=endpoint,
        )
    except ValueError as exc:
        _fail("BadConfig", str(exc))
        raise AssertionError  # unreachable


def _read_query(query: str | None, query_file: str | None) -> str:
    if query:
        return query
    if query_file:
        return Path(query_file).read_text(encoding="utf-8")
    _fail("MissingQuery", "pass --query or --query-file")
    raise AssertionError


def _limits_options(fn):
    fn = click.option("--max-iterations", type=int, default=None)(fn)
    fn = click.option("--max-nodes", type=int, default=None)(fn)
    fn = click.option("--time-budget", type=float, default=None)(fn)
    return fn


def _build_limits(max_iterations, max_nodes, time_budget) -> SolverLimits:
    kwargs = {}
    if max_iterations is not None:
        kwargs["max_iterations"] = max_iterations
    if max_nodes is not None:
        kwargs["max_nodes"] = max_nodes
    if time_budget is not None:
        kwargs["time_budget"] = time_budget
    return SolverLimits(**kwargs)


@click.group()
def main() -> None:
    """Natural-language operations research pipeline."""


@main.command()
@click.option("--query", default=None)
@click.option("--query-file", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default="model.yaml", show_default=True)
@click.option("--result-json", type=click.Path(), default=None, help="Also write the attempt reports.")
@_llm_options
def create(query, query_file, out, result_json, **llm_kwargs) -> None:
    """Generate a model document from a natural-language query."""
    config = _build_config(**llm_kwargs)
    text = _read_query(query, query_file)
    try:
        result = generate(text, config, mode="create")
    except (BackendUnavailable, FixtureExhausted) as exc:
        _fail(type(exc).__name__, str(exc), code=2)
        return
    if result_json:
        Path(result_json).write_text(json.dumps(result.to_json_dict(), indent=2), encoding="utf-8")
    if result.final is None:
        _fail("GenerationFailed", f"all {len(result.attempts)} attempts irreparable", code=3)
    Path(out).write_text(serialize_model_yaml(result.final), encoding="utf-8")
    click.echo(f"wrote {out} (succeeded at attempt {result.succeeded_at})")


@main.command()
@click.option("--model", "model_file", type=click.Path(exists=True), required=True, help="Original model YAML.")
@click.option("--query", default=None)
@click.option("--query-file", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None, help="Defaults to rewriting the input file.")
@click.option("--show-diff/--no-show-diff", default=True, show_default=True)
@_llm_options
def edit(model_file, query, query_file, out, show_diff, **llm_kwargs) -> None:
    """Apply a natural-language edit to an existing model document."""
    config = _build_config(**llm_kwargs)
    text = _read_query(query, query_file)
    try:
        original = parse_model_yaml(Path(model_file).read_text(encoding="utf-8"))
    except DocumentError as exc:
        _fail("InvalidDocument", str(exc))
        return
    try:
        result = generate(text, config, mode="edit", original=original)
    except (BackendUnavailable, FixtureExhausted) as exc:
        _fail(type(exc).__name__, str(exc), code=2)
        return
    if result.final is None:
        _fail("GenerationFailed", f"all {len(result.attempts)} attempts irreparable", code=3)
    destination = out or model_file
    Path(destination).write_text(serialize_model_yaml(result.final), encoding="utf-8")
    click.echo(f"wrote {destination}")
    if show_diff:
        for change in diff_documents(original, result.final):
            click.echo(f"  {change.kind}: {change.path}")


@main.command()
@click.option("--model", "model_file", type=click.Path(exists=True), required=True)
@click.option("--data", "data_file", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None, help="Write the outcome JSON here.")
@click.option("--dump-lp", "dump_lp_file", type=click.Path(), default=None, help="Write the standard-form tableau.")
@click.option("--missing-policy", type=click.Choice(["error", "zero"]), default="error", show_default=True)
@_limits_options
def solve_cmd(model_file, data_file, out, dump_lp_file, missing_policy, max_iterations, max_nodes, time_budget) -> None:
    """Bind data to a model and solve it."""
    concrete, outcome = _solve_files(
        model_file, data_file, missing_policy, _build_limits(max_iterations, max_nodes, time_budget), dump_lp_file
    )
    display = {v.id: v.display for v in concrete.variables}
    payload = outcome.to_json_dict(display_names=display)
    body = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(body, encoding="utf-8")
        click.echo(f"wrote {out} (status {outcome.status.value})")
    else:
        click.echo(body)
    if outcome.status.value not in ("Optimal", "Suboptimal"):
        sys.exit(4)


def _solve_files(model_file, data_file, missing_policy, limits, dump_lp_file=None):
    try:
        doc = parse_model_yaml(Path(model_file).read_text(encoding="utf-8"))
    except DocumentError as exc:
        _fail("InvalidDocument", str(exc))
    try:
        data = DataSet.from_json(Path(data_file).read_text(encoding="utf-8"))
    except DataSetError as exc:
        _fail("MalformedDataSet", str(exc))
    try:
        concrete = bind_data(build_abstract(doc), data, missing_policy=missing_policy)
    except (ContractError, ModelBuildError) as exc:
        _fail("BindingFailed", str(exc))
    if dump_lp_file:
        dump_lp(concrete, dump_lp_file)
    try:
        outcome = solve(concrete, limits)
    except IncompatibleHint as exc:
        _fail("IncompatibleHint", str(exc))
    return concrete, outcome


main.add_command(solve_cmd, name="solve")


@main.command()
@click.option("--model", "model_file", type=click.Path(exists=True), required=True)
@click.option("--data", "data_file", type=click.Path(exists=True), required=True)
@click.option("--schema", "schema_file", type=click.Path(exists=True), default=None, help="Report schema YAML; defaults to the generated fallback schema.")
@click.option("--report-db", type=click.Path(), default=None, help="sqlite store path.")
@click.option("--report-dir", type=click.Path(), default=None, help="CSV export directory.")
@click.option("--missing-policy", type=click.Choice(["error", "zero"]), default="error", show_default=True)
@_limits_options
def report(model_file, data_file, schema_file, report_db, report_dir, missing_policy, max_iterations, max_nodes, time_budget) -> None:
    """Solve a model and persist the solution report."""
    concrete, outcome = _solve_files(
        model_file, data_file, missing_policy, _build_limits(max_iterations, max_nodes, time_budget)
    )
    if outcome.assignment is None:
        _fail("NoSolution", f"status {outcome.status.value}; nothing to report", code=4)
    doc = parse_model_yaml(Path(model_file).read_text(encoding="utf-8"))
    if schema_file:
        schema = parse_report_schema(Path(schema_file).read_text(encoding="utf-8"), doc)
    else:
        schema = default_schema(doc)
    rows = emit_rows(schema, concrete, outcome)
    summary = persist(rows, schema, db_path=report_db, csv_dir=report_dir)
    click.echo(json.dumps(summary.to_json_dict(), indent=2))


@main.command()
@click.option("--corpus", type=click.Path(exists=True), required=True)
@click.option("--models", default="fixture-model", show_default=True, help="Comma-separated model names.")
@click.option("--temperatures", default="0.2", show_default=True, help="Comma-separated temperatures.")
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--mode", type=click.Choice(["create", "edit"]), default="create", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--parallel", type=int, default=1, show_default=True)
@click.option("--llm-backend", type=click.Choice(["remote", "fixture"]), default="fixture", show_default=True)
@click.option("--endpoint", default=None)
@click.option("--fixed-latency", type=float, default=None, help="Override measured latency (fixture default: 0).")
@click.option("--out", type=click.Path(), default="eval.json", show_default=True)
def eval_cmd(corpus, models, temperatures, k, mode, seed, parallel, llm_backend, endpoint, fixed_latency, out) -> None:
    """Run the Valid@k / latency evaluation over a problem corpus."""
    if fixed_latency is None:
        fixed_latency = 0.0 if llm_backend == "fixture" else None
    report_obj = run_eval(
        corpus,
        models=[m.strip() for m in models.split(",") if m.strip()],
        temperatures=[float(t) for t in temperatures.split(",") if t.strip()],
        k=k,
        mode=mode,
        seed=seed,
        parallel=parallel,
        backend=llm_backend,
        fixed_latency=fixed_latency,
        endpoint=endpoint,
    )
    Path(out).write_text(report_obj.to_json(), encoding="utf-8")
    click.echo(report_obj.format_text(), nl=False)
    click.echo(f"\nwrote {out}")


main.add_command(eval_cmd, name="eval")


@main.command()
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--llm-backend", type=click.Choice(["remote", "fixture"]), default="fixture", show_default=True)
@click.option("--fixture-dir", type=click.Path(), default=None)
@click.option("--fixture-mode", type=click.Choice(["scripted", "corpus"]), default="scripted", show_default=True)
@click.option("--llm-model", default="fixture-model", show_default=True)
@click.option("--temperature", type=float, default=0.2, show_default=True)
@click.option("--attempts", type=int, default=3, show_default=True)
@click.option("--endpoint", default=None)
@click.option("--session-dir", type=click.Path(), default=None, help="Snapshot sessions to this directory.")
def serve(port, host, llm_backend, fixture_dir, fixture_mode, llm_model, temperature, attempts, endpoint, session_dir) -> None:
    """Run the HTTP service."""
    from .service import run_server

    config = _build_config(llm_backend, fixture_dir, fixture_mode, llm_model, temperature, attempts, endpoint)
    run_server(config, port=port, host=host, session_dir=session_dir)


if __name__ == "__main__":
    main()
