"""Session-oriented HTTP facade for the create / data / solve / report /
edit loop.

Sessions are in-memory (optionally snapshotted to a directory); history
is append-only and the current document is always the last entry.
Per-session mutations are serialized by a session lock; different
sessions proceed concurrently.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .documents import DocumentError, ModelDocument, diff_documents, parse_model_yaml, serialize_model_yaml
from .llm import LlmConfig, generate, make_client
from .modeling import ContractError, DataSet, DataSetError, ModelBuildError, bind_data, build_abstract, check_contract
from .reporting import NoAssignment, ReportSchemaError, default_schema, emit_rows, parse_report_schema
from .solve import IncompatibleHint, SolverLimits, solve


@dataclass
class Session:
    id: str
    history: list[tuple[ModelDocument, str]] = field(default_factory=list)
    data: DataSet | None = None
    outcome: Any = None
    solved_model: Any = None
    report_schema: Any = None
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)
    lock: threading.RLock = field(default_factory=threading.RLock)

    @property
    def current(self) -> ModelDocument | None:
        return self.history[-1][0] if self.history else None


class SessionStore:
    def __init__(self, snapshot_dir: str | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._snapshot_dir = Path(snapshot_dir) if snapshot_dir else None
        if self._snapshot_dir:
            self._snapshot_dir.mkdir(parents=True, exist_ok=True)
            self._load_snapshots()

    def create(self) -> Session:
        session = Session(id=uuid.uuid4().hex)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            return self._sessions.get(session_id)

    def snapshot(self, session: Session) -> None:
        if not self._snapshot_dir:
            return
        payload = {
            "id": session.id,
            "created_at": session.created_at,
            "updated_at": session.updated_at,
            "history": [
                {"yaml": serialize_model_yaml(doc), "query": query}
                for doc, query in session.history
            ],
            "data": session.data.to_json_dict() if session.data else None,
        }
        path = self._snapshot_dir / f"{session.id}.json"
        path.write_text(json.dumps(payload, indent=2), encoding="utf-8")

    def _load_snapshots(self) -> None:
        assert self._snapshot_dir is not None
        for path in sorted(self._snapshot_dir.glob("*.json")):
            try:
                payload = json.loads(path.read_text(encoding="utf-8"))
                session = Session(id=payload["id"])
                session.created_at = payload.get("created_at", time.time())
                session.updated_at = payload.get("updated_at", time.time())
                for entry in payload.get("history", []):
                    session.history.append((parse_model_yaml(entry["yaml"]), entry["query"]))
                if payload.get("data") is not None:
                    session.data = DataSet.from_json_dict(payload["data"])
                self._sessions[session.id] = session
            except (KeyError, ValueError, DocumentError):
                continue  # unreadable snapshot: skip rather than fail startup


def _error(status: int, kind: str, message: str, **extra) -> JSONResponse:
    body = {"error": {"kind": kind, "message": message}}
    body.update(extra)
    return JSONResponse(status_code=status, content=body)


async def _json_body(request: Request) -> tuple[Any, JSONResponse | None]:
    raw = await request.body()
    try:
        return json.loads(raw.decode("utf-8") if raw else "null"), None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        return None, _error(400, "MalformedJson", str(exc))


def create_app(llm_config: LlmConfig, session_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="optilang service")
    store = SessionStore(session_dir)
    # one completion client for the app: a scripted fixture is the
    # transcript of successive calls across the whole session flow
    completion_client = make_client(llm_config)
    app.state.store = store
    app.state.llm_config = llm_config

    def _session_or_404(session_id: str) -> tuple[Session | None, JSONResponse | None]:
        session = store.get(session_id)
        if session is None:
            return None, _error(404, "UnknownSession", f"no session {session_id!r}")
        return session, None

    @app.post("/sessions")
    def create_session() -> dict:
        session = store.create()
        return {"id": session.id}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session, failure = _session_or_404(session_id)
        if failure:
            return failure
        return {
            "id": session.id,
            "versions": len(session.history),
            "has_document": session.current is not None,
            "has_data": session.data is not None,
            "has_outcome": session.outcome is not None,
            "created_at": session.created_at,
            "updated_at": session.updated_at,
        }

    @app.get("/sessions/{session_id}/history")
    def get_history(session_id: str):
        session, failure = _session_or_404(session_id)
        if failure:
            return failure
        return {
            "versions": [
                {"index": i, "query": query, "yaml": serialize_model_yaml(doc)}
                for i, (doc, query) in enumerate(session.history)
            ]
        }

    @app.post("/sessions/{session_id}/create")
    async def post_create(session_id: str, request: Request):
        session, failure = _session_or_404(session_id)
        if failure:
            return failure
        body, bad = await _json_body(request)
        if bad:
            return bad
        if not isinstance(body, dict) or not isinstance(body.get("query"), str) or not body["query"].strip():
            return _error(400, "MissingQuery", "body must be {\"query\": \"...\"}")
        with session.lock:
            result = generate(body["query"], llm_config, mode="create", client=completion_client)
            if result.final is None:
                return _error(
                    422,
                    "GenerationFailed",
                    "every attempt was irreparable",
                    attempts=[a.to_json_dict() for a in result.attempts],
                )
            session.history.append((result.final, body["query"]))
            session.updated_at = time.time()
            store.snapshot(session)
            return {
                "yaml": serialize_model_yaml(result.final),
                "validation": result.attempts[result.succeeded_at - 1].report.to_json_dict(),
                "attempts": [a.to_json_dict() for a in result.attempts],
                "succeeded_at": result.succeeded_at,
            }

    @app.post("/sessions/{session_id}/edit")
    async def post_edit(session_id: str, request: Request):
        session, failure = _session_or_404(session_id)
        if failure:
            return failure
        body, bad = await _json_body(request)
        if bad:
            return bad
        if not isinstance(body, dict) or not isinstance(body.get("query"), str) or not body["query"].strip():
            return _error(400, "MissingQuery", "body must be {\"query\": \"...\"}")
        with session.lock:
            original = session.current
            if original is None:
                return _error(409, "NoDocument", "create a model before editing")
            result = generate(
                body["query"], llm_config, mode="edit", original=original, client=completion_client
            )
            if result.final is None:
                return _error(
                    422,
                    "GenerationFailed",
                    "every attempt was irreparable",
                    attempts=[a.to_json_dict() for a in result.attempts],
                )
            changes = diff_documents(original, result.final)
            session.history.append((result.final, body["query"]))
            session.updated_at = time.time()
            store.snapshot(session)
            return {
                "yaml": serialize_model_yaml(result.final),
                "validation": result.attempts[result.succeeded_at - 1].report.to_json_dict(),
                "attempts": [a.to_json_dict() for a in result.attempts],
                "succeeded_at": result.succeeded_at,
                "diff": [change.to_json_dict() for change in changes],
            }

    @app.put("/sessions/{session_id}/data")
    async def put_data(session_id: str, request: Request):
        session, failure = _session_or_404(session_id)
        if failure:
            return failure
        body, bad = await _json_body(request)
        if bad:
            return bad
        with session.lock:
            doc = session.current
            if doc is None:
                return _error(409, "NoDocument", "create a model before uploading data")
            try:
                data = DataSet.from_json_dict(body)
            except DataSetError as exc:
                return _error(400, "MalformedDataSet", str(exc))
            abstract = build_abstract(doc)
            errors = check_contract(abstract, data)
            if not any(e.fatal for e in errors):
                session.data = data
                session.updated_at = time.time()
                store.snapshot(session)
            return {
                "errors": [e.to_json_dict() for e in errors],
                "accepted": not any(e.fatal for e in errors),
            }

    @app.post("/sessions/{session_id}/solve")
    async def post_solve(session_id: str, request: Request):
        session, failure = _session_or_404(session_id)
        if failure:
            return failure
        body, bad = await _json_body(request)
        if bad:
            return bad
        options = body if isinstance(body, dict) else {}
        with session.lock:
            doc = session.current
            if doc is None:
                return _error(409, "NoDocument", "create a model before solving")
            if session.data is None:
                return _error(409, "NoData", "upload data before solving")
            limits_spec = options.get("limits") or {}
            try:
                limits = SolverLimits(**limits_spec)
            except (TypeError, ValueError) as exc:
                return _error(400, "BadLimits", str(exc))
            try:
                concrete = bind_data(
                    build_abstract(doc),
                    session.data,
                    missing_policy=options.get("missing_policy", "error"),
                )
            except ContractError as exc:
                return _error(
                    422, "BindingFailed", str(exc), errors=[e.to_json_dict() for e in exc.errors]
                )
            except ModelBuildError as exc:
                return _error(422, "BindingFailed", str(exc), errors=[{"detail": str(exc)}])
            try:
                outcome = solve(concrete, limits)
            except IncompatibleHint as exc:
                return _error(422, "IncompatibleHint", str(exc))
            session.outcome = outcome
            session.solved_model = concrete
            session.updated_at = time.time()
            display = {v.id: v.display for v in concrete.variables}
            return outcome.to_json_dict(display_names=display)

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str):
        session, failure = _session_or_404(session_id)
        if failure:
            return failure
        with session.lock:
            if session.outcome is None or session.outcome.assignment is None:
                return _error(409, "NoSolution", "solve the model before requesting a report")
            doc = session.current
            schema = session.report_schema or default_schema(doc)
            try:
                rows = emit_rows(schema, session.solved_model, session.outcome)
            except NoAssignment as exc:
                return _error(409, "NoSolution", str(exc))
            tables = []
            for table in schema.tables:
                tables.append(
                    {
                        "name": table.name,
                        "variable": table.variable,
                        "columns": [c.name for c in table.columns],
                        "rows": [list(r.cells) for r in rows if r.table == table.name],
                    }
                )
            return {"tables": tables}

    @app.put("/sessions/{session_id}/report-schema")
    async def put_report_schema(session_id: str, request: Request):
        session, failure = _session_or_404(session_id)
        if failure:
            return failure
        body, bad = await _json_body(request)
        if bad:
            return bad
        if not isinstance(body, dict) or not isinstance(body.get("yaml"), str):
            return _error(400, "MissingYaml", "body must be {\"yaml\": \"...\"}")
        with session.lock:
            doc = session.current
            if doc is None:
                return _error(409, "NoDocument", "create a model before attaching a report schema")
            try:
                schema = parse_report_schema(body["yaml"], doc)
            except ReportSchemaError as exc:
                return _error(422, "BadReportSchema", str(exc), problems=exc.problems)
            session.report_schema = schema
            session.updated_at = time.time()
            return {"tables": [t.name for t in schema.tables]}

    return app


def run_server(
    llm_config: LlmConfig,
    port: int = 8080,
    host: str = "127.0.0.1",
    session_dir: str | None = None,
) -> None:
    import uvicorn

    uvicorn.run(create_app(llm_config, session_dir), host=host, port=port, log_level="info")
