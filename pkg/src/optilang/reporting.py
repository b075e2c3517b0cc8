"""Solution reports: schema parsing, row emission, persistence.

The report schema comes either from the LLM (via the report prompt) or
from the deterministic fallback generator, and binds table columns to a
variable batch's key/value fields. Rows persist to an embedded sqlite
store (idempotent upsert on the primary key) and to CSV files.
"""

from __future__ import annotations

import csv
import re
import sqlite3
from dataclasses import dataclass
from pathlib import Path

import yaml

from .documents import ModelDocument
from .modeling import ConcreteModel
from .solve import SolveOutcome

COLUMN_TYPES = ("str", "int", "integer", "float", "bool")


@dataclass(frozen=True)
class ColumnDecl:
    name: str
    type: str
    desc: str
    primary_key: bool
    value: str  # key-field or value-field name of the bound batch


@dataclass(frozen=True)
class TableDecl:
    name: str
    desc: str
    variable: str
    columns: tuple[ColumnDecl, ...]


@dataclass(frozen=True)
class ReportSchema:
    tables: tuple[TableDecl, ...]


@dataclass(frozen=True)
class SolutionRow:
    table: str
    cells: tuple


@dataclass
class WriteSummary:
    tables_created: int
    rows_written: int
    table_counts: dict[str, int]

    def to_json_dict(self) -> dict:
        return {
            "tables_created": self.tables_created,
            "rows_written": self.rows_written,
            "table_counts": dict(self.table_counts),
        }


class ReportSchemaError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class NoAssignment(ValueError):
    pass


class StoreUnavailable(RuntimeError):
    pass


class PrimaryKeyConflict(ValueError):
    pass


def parse_report_schema(text: str, doc: ModelDocument | None = None) -> ReportSchema:
    """Parse report-schema YAML; the leading "Database Schema:" line is
    accepted both as a caption key and as a wrapper mapping."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ReportSchemaError([f"not parseable as YAML: {exc}"]) from exc
    if isinstance(data, dict) and isinstance(data.get("Database Schema"), dict):
        data = data["Database Schema"]
    if not isinstance(data, dict) or not isinstance(data.get("tables"), list):
        raise ReportSchemaError(["schema must contain a `tables:` list"])

    problems: list[str] = []
    batches = {b.name: b for b in doc.variable_batches} if doc is not None else None
    tables: list[TableDecl] = []
    for t_idx, body in enumerate(data["tables"]):
        path = f"tables[{t_idx}]"
        if not isinstance(body, dict):
            problems.append(f"{path}: table entry must be a mapping")
            continue
        name = body.get("name")
        variable = body.get("variable")
        desc = body.get("desc", "")
        if not isinstance(name, str) or not name:
            problems.append(f"{path}: missing table name")
            continue
        if not isinstance(variable, str):
            problems.append(f"{path}: missing variable binding")
            continue
        batch = None
        if batches is not None:
            batch = batches.get(variable)
            if batch is None:
                problems.append(f"{path}: UnknownVariable {variable!r}")
                continue
        raw_columns = body.get("columns")
        if not isinstance(raw_columns, list) or not raw_columns:
            problems.append(f"{path}: table needs a non-empty columns list")
            continue
        columns: list[ColumnDecl] = []
        bindable = None
        if batch is not None:
            bindable = {f.name for f in batch.key} | {f.name for f in batch.value}
        for c_idx, col in enumerate(raw_columns):
            col_path = f"{path}.columns[{c_idx}]"
            if not isinstance(col, dict):
                problems.append(f"{col_path}: column entry must be a mapping")
                continue
            cname = col.get("name")
            ctype = col.get("type")
            cvalue = col.get("value")
            if not isinstance(cname, str) or not cname:
                problems.append(f"{col_path}: missing column name")
                continue
            if ctype not in COLUMN_TYPES:
                problems.append(f"{col_path}: type must be one of {COLUMN_TYPES}")
                continue
            if not isinstance(cvalue, str):
                problems.append(f"{col_path}: missing value binding")
                continue
            if bindable is not None and cvalue not in bindable:
                problems.append(f"{col_path}: UnknownBinding {cvalue!r}")
                continue
            columns.append(
                ColumnDecl(
                    cname,
                    "int" if ctype == "integer" else ctype,
                    str(col.get("desc", "")),
                    bool(col.get("primary_key", False)),
                    cvalue,
                )
            )
        if columns and not any(c.primary_key for c in columns):
            problems.append(f"{path}: at least one column must be primary_key")
            continue
        if columns:
            tables.append(TableDecl(name, str(desc), variable, tuple(columns)))
    if problems:
        raise ReportSchemaError(problems)
    return ReportSchema(tuple(tables))


def default_schema(doc: ModelDocument) -> ReportSchema:
    """Fallback generator: one table per batch, key fields as primary
    keys plus one column per value field. Keeps reports working offline."""
    tables = []
    for batch in doc.variable_batches:
        columns = [
            ColumnDecl(f.name, f.type, f"Key field {f.name}", True, f.name) for f in batch.key
        ]
        columns.extend(
            ColumnDecl(f.name, f.type, f"Solved value {f.name}", False, f.name)
            for f in batch.value
        )
        tables.append(TableDecl(f"{batch.name}_solution", batch.desc, batch.name, tuple(columns)))
    return ReportSchema(tuple(tables))


def emit_rows(
    schema: ReportSchema, model: ConcreteModel, outcome: SolveOutcome
) -> list[SolutionRow]:
    """One row per variable of each referenced batch; key-bound columns
    take key tuple components, value-bound columns the solved value."""
    if outcome.assignment is None:
        raise NoAssignment(f"outcome status {outcome.status.value} carries no assignment")
    doc_batches = {}
    for variable in model.variables:
        doc_batches.setdefault(variable.batch, []).append(variable)
    rows: list[SolutionRow] = []
    for table in schema.tables:
        variables = doc_batches.get(table.variable, [])
        key_fields = _key_field_positions(model, table.variable)
        for variable in variables:
            cells = []
            for column in table.columns:
                if column.value in key_fields:
                    cells.append(_cast(variable.key[key_fields[column.value]], column.type))
                else:
                    cells.append(_cast(outcome.assignment[variable.id], column.type))
            rows.append(SolutionRow(table.name, tuple(cells)))
    return rows


def _key_field_positions(model: ConcreteModel, batch: str) -> dict[str, int]:
    return model.key_fields.get(batch, {})


def _cast(value, typename: str):
    if typename == "int":
        return int(round(float(value)))
    if typename == "float":
        return float(value)
    if typename == "bool":
        return bool(round(float(value))) if not isinstance(value, str) else value == "true"
    return str(value)


def persist(
    rows: list[SolutionRow],
    schema: ReportSchema,
    db_path: str | None = None,
    csv_dir: str | None = None,
    strict: bool = False,
) -> WriteSummary:
    """Idempotent upsert keyed by the primary-key columns; CSV export
    (one file per table, header = column names) when csv_dir is given."""
    by_table: dict[str, list[SolutionRow]] = {}
    for row in rows:
        by_table.setdefault(row.table, []).append(row)
    tables = {t.name: t for t in schema.tables}

    table_counts: dict[str, int] = {}
    created = 0
    written = 0
    connection = None
    if db_path is not None:
        try:
            connection = sqlite3.connect(db_path)
        except sqlite3.Error as exc:
            raise StoreUnavailable(f"cannot open store at {db_path}: {exc}") from exc
    try:
        for name, decl in tables.items():
            table_rows = by_table.get(name, [])
            if connection is not None:
                created += _ensure_table(connection, decl)
                written += _upsert(connection, decl, table_rows, strict)
                count = connection.execute(
                    f'SELECT COUNT(*) FROM {_quote(decl.name)}'
                ).fetchone()[0]
                table_counts[name] = count
                stored = connection.execute(
                    f'SELECT {", ".join(_quote(c.name) for c in decl.columns)} '
                    f'FROM {_quote(decl.name)} ORDER BY rowid'
                ).fetchall()
            else:
                written += len(table_rows)
                table_counts[name] = len(table_rows)
                stored = [row.cells for row in table_rows]
            if csv_dir is not None:
                _write_csv(csv_dir, decl, stored)
        if connection is not None:
            connection.commit()
    finally:
        if connection is not None:
            connection.close()
    return WriteSummary(created, written, table_counts)


def _ensure_table(connection: sqlite3.Connection, decl: TableDecl) -> int:
    exists = connection.execute(
        "SELECT name FROM sqlite_master WHERE type='table' AND name=?", (decl.name,)
    ).fetchone()
    column_sql = ", ".join(f"{_quote(c.name)} {_sql_type(c.type)}" for c in decl.columns)
    pk = ", ".join(_quote(c.name) for c in decl.columns if c.primary_key)
    connection.execute(
        f"CREATE TABLE IF NOT EXISTS {_quote(decl.name)} ({column_sql}, PRIMARY KEY ({pk}))"
    )
    return 0 if exists else 1


def _upsert(
    connection: sqlite3.Connection, decl: TableDecl, rows: list[SolutionRow], strict: bool
) -> int:
    names = [c.name for c in decl.columns]
    pk_names = [c.name for c in decl.columns if c.primary_key]
    non_pk = [c.name for c in decl.columns if not c.primary_key]
    placeholders = ", ".join("?" for _ in names)
    if strict:
        for row in rows:
            key = tuple(
                cell for cell, col in zip(row.cells, decl.columns) if col.primary_key
            )
            where = " AND ".join(f"{_quote(n)} = ?" for n in pk_names)
            existing = connection.execute(
                f"SELECT {', '.join(_quote(n) for n in names)} FROM {_quote(decl.name)} WHERE {where}",
                key,
            ).fetchone()
            if existing is not None and tuple(existing) != tuple(row.cells):
                raise PrimaryKeyConflict(
                    f"{decl.name}: key {key!r} already stored with different cells"
                )
    if non_pk:
        update = ", ".join(f"{_quote(n)} = excluded.{_quote(n)}" for n in non_pk)
        conflict = f"ON CONFLICT ({', '.join(_quote(n) for n in pk_names)}) DO UPDATE SET {update}"
    else:
        conflict = f"ON CONFLICT ({', '.join(_quote(n) for n in pk_names)}) DO NOTHING"
    statement = (
        f"INSERT INTO {_quote(decl.name)} ({', '.join(_quote(n) for n in names)}) "
        f"VALUES ({placeholders}) {conflict}"
    )
    for row in rows:
        connection.execute(statement, row.cells)
    return len(rows)


def _write_csv(csv_dir: str, decl: TableDecl, stored: list[tuple]) -> None:
    directory = Path(csv_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{_filename(decl.name)}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([c.name for c in decl.columns])
        writer.writerows(stored)


def _filename(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


def _sql_type(typename: str) -> str:
    return {"str": "TEXT", "int": "INTEGER", "float": "REAL", "bool": "INTEGER"}[typename]


def _quote(identifier: str) -> str:
    return '"' + identifier.replace('"', '""') + '"'
