"""Builder/executor data layer: abstract models, data contracts, binding.

An AbstractModel exposes the InputData section as a contract; binding a
conforming DataSet enumerates variables from each batch's ``indices``
expression, lowers the objective, and expands every constraint batch
into affine constraints, producing a ConcreteModel the solver consumes.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any

from .documents import Field, ModelDocument
from .exprs import (
    AffineConstraint,
    AffineExpr,
    DataEnv,
    EvalError,
    Table,
    VarTable,
    eval_concrete,
    expand_constraints,
    lower_affine,
    parse_expr,
)

log = logging.getLogger(__name__)

FATAL_BINDING_KINDS = ("MissingInput", "KeyArityMismatch", "TypeMismatch", "DuplicateKey")


@dataclass(frozen=True)
class ContractEntry:
    name: str
    key: tuple[Field, ...]
    value: tuple[Field, ...]
    desc: str

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "key": [{f.name: f.type} for f in self.key],
            "value": [{f.name: f.type} for f in self.value],
            "desc": self.desc,
        }


@dataclass(frozen=True)
class AbstractModel:
    source: ModelDocument
    contract: tuple[ContractEntry, ...]
    solver_hint: str | None


@dataclass(frozen=True)
class BindingError:
    input: str
    kind: str  # MissingInput | ExtraInput | KeyArityMismatch | TypeMismatch | DuplicateKey
    detail: str

    @property
    def fatal(self) -> bool:
        return self.kind in FATAL_BINDING_KINDS

    def to_json_dict(self) -> dict:
        return {"input": self.input, "kind": self.kind, "detail": self.detail}


class ContractError(ValueError):
    """Raised by bind_data when the dataset does not satisfy the contract."""

    def __init__(self, errors: list[BindingError]):
        super().__init__("; ".join(f"{e.input}: {e.kind}" for e in errors))
        self.errors = errors


class ModelBuildError(ValueError):
    """An expression failed during binding; carries the model context."""

    def __init__(self, where: str, cause: Exception):
        super().__init__(f"{where}: {cause}")
        self.where = where
        self.cause = cause


class DataSetError(ValueError):
    pass


class DataSet:
    """Named record lists: ``{"<input>": [{"key": [..], "value": [..]}, ...]}``."""

    def __init__(self, records: dict[str, list[tuple[tuple, tuple]]]):
        self.records = records

    @classmethod
    def from_json_dict(cls, data: Any) -> "DataSet":
        if not isinstance(data, dict):
            raise DataSetError("dataset must be a JSON object keyed by input name")
        records: dict[str, list[tuple[tuple, tuple]]] = {}
        for name, rows in data.items():
            if not isinstance(rows, list):
                raise DataSetError(f"input {name!r} must hold a list of records")
            out = []
            for i, row in enumerate(rows):
                if (
                    not isinstance(row, dict)
                    or not isinstance(row.get("key"), list)
                    or not isinstance(row.get("value"), list)
                ):
                    raise DataSetError(
                        f"input {name!r} record {i} must be {{\"key\": [..], \"value\": [..]}}"
                    )
                out.append((tuple(row["key"]), tuple(row["value"])))
            records[str(name)] = out
        return cls(records)

    @classmethod
    def from_json(cls, text: str) -> "DataSet":
        try:
            return cls.from_json_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise DataSetError(f"dataset is not valid JSON: {exc}") from exc

    def to_json_dict(self) -> dict:
        return {
            name: [{"key": list(k), "value": list(v)} for k, v in rows]
            for name, rows in self.records.items()
        }


@dataclass(frozen=True)
class VariableDef:
    id: int
    batch: str
    key: tuple
    vtype: str  # C | I | B
    lower: float
    upper: float

    @property
    def display(self) -> str:
        return f"{self.batch}[{','.join(str(k) for k in self.key)}]"


@dataclass(frozen=True)
class ConcreteModel:
    variables: tuple[VariableDef, ...]
    objective: AffineExpr
    sense: str  # min | max
    constraints: tuple[AffineConstraint, ...]
    provenance: dict[str, tuple[str, tuple[tuple[str, Any], ...]]]
    solver_hint: str | None = None
    notes: tuple[str, ...] = ()
    # batch name -> key field name -> position within the key tuple
    key_fields: dict[str, dict[str, int]] = field(default_factory=dict)

    def variable_by_id(self, vid: int) -> VariableDef:
        return self.variables[vid]

    def display_assignment(self, assignment: dict[int, float]) -> dict[str, float]:
        return {self.variables[vid].display: value for vid, value in assignment.items()}


def build_abstract(doc: ModelDocument) -> AbstractModel:
    """Compile a validated document; the contract mirrors InputData."""
    contract = tuple(
        ContractEntry(decl.name, decl.key, decl.value, decl.desc) for decl in doc.input_data
    )
    return AbstractModel(doc, contract, doc.solver_hint)


def check_contract(model: AbstractModel, data: DataSet) -> list[BindingError]:
    """Empty list iff the dataset satisfies the contract exactly;
    extra inputs are reported but not fatal."""
    errors: list[BindingError] = []
    by_name = {entry.name: entry for entry in model.contract}
    for name in data.records:
        if name not in by_name:
            errors.append(BindingError(name, "ExtraInput", f"input {name!r} is not in the contract"))
    for entry in model.contract:
        rows = data.records.get(entry.name)
        if rows is None:
            errors.append(
                BindingError(entry.name, "MissingInput", f"contract input {entry.name!r} absent")
            )
            continue
        seen: set[tuple] = set()
        for i, (key, value) in enumerate(rows):
            if len(key) != len(entry.key):
                errors.append(
                    BindingError(
                        entry.name,
                        "KeyArityMismatch",
                        f"record {i} key has {len(key)} parts, contract requires {len(entry.key)}",
                    )
                )
                continue
            if len(value) != len(entry.value):
                errors.append(
                    BindingError(
                        entry.name,
                        "KeyArityMismatch",
                        f"record {i} value has {len(value)} parts, contract requires {len(entry.value)}",
                    )
                )
                continue
            for part, spec in zip(key, entry.key):
                if not _scalar_ok(part, spec.type):
                    errors.append(
                        BindingError(
                            entry.name,
                            "TypeMismatch",
                            f"record {i} key field {spec.name!r} expects {spec.type}, got {part!r}",
                        )
                    )
            for part, spec in zip(value, entry.value):
                if not _scalar_ok(part, spec.type):
                    errors.append(
                        BindingError(
                            entry.name,
                            "TypeMismatch",
                            f"record {i} value field {spec.name!r} expects {spec.type}, got {part!r}",
                        )
                    )
            if key in seen:
                errors.append(
                    BindingError(entry.name, "DuplicateKey", f"key {key!r} appears more than once")
                )
            seen.add(key)
    return errors


def _scalar_ok(value: Any, typename: str) -> bool:
    if typename == "str":
        return isinstance(value, str)
    if typename == "bool":
        return isinstance(value, bool)
    if typename == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if typename == "float":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return False


def build_env(model: AbstractModel, data: DataSet, missing_policy: str = "error") -> DataEnv:
    tables = {}
    for entry in model.contract:
        tables[entry.name] = Table(
            entry.name,
            len(entry.key),
            len(entry.value),
            data.records.get(entry.name, []),
        )
    return DataEnv(tables=tables, missing_policy=missing_policy)


def bind_data(
    model: AbstractModel, data: DataSet, missing_policy: str = "error"
) -> ConcreteModel:
    """Instantiate a concrete model; deterministic for fixed inputs."""
    fatal = [e for e in check_contract(model, data) if e.fatal]
    if fatal:
        raise ContractError(fatal)
    env = build_env(model, data, missing_policy)
    doc = model.source

    variables: list[VariableDef] = []
    var_table = VarTable()
    for b_idx, batch in enumerate(doc.variable_batches):
        where = f"VariableBatch[{b_idx}].indices"
        try:
            keys = eval_concrete(parse_expr(batch.indices), env)
        except EvalError as exc:
            raise ModelBuildError(where, exc) from exc
        if not isinstance(keys, (list, tuple)):
            raise ModelBuildError(where, TypeError("indices must evaluate to a list of keys"))
        mapping = var_table.add_batch(batch.name)
        for raw_key in keys:
            key = raw_key if isinstance(raw_key, tuple) else (raw_key,)
            if len(key) != len(batch.key):
                raise ModelBuildError(
                    where,
                    ValueError(
                        f"index key {key!r} has {len(key)} parts, batch declares {len(batch.key)}"
                    ),
                )
            if key in mapping:
                raise ModelBuildError(where, ValueError(f"duplicate variable key {key!r}"))
            vid = len(variables)
            mapping[key] = vid
            variables.append(
                VariableDef(vid, batch.name, key, batch.vtype, batch.lower_bound, batch.upper_bound)
            )

    try:
        objective = lower_affine(doc.objective.constructor, env, var_table)
    except EvalError as exc:
        raise ModelBuildError("Objective.constructor", exc) from exc

    constraints: list[AffineConstraint] = []
    provenance: dict[str, tuple[str, tuple[tuple[str, Any], ...]]] = {}
    notes: list[str] = []
    for c_idx, batch in enumerate(doc.constraint_batches):
        where = f"ConstraintBatch[{c_idx}].generator"
        try:
            expanded = expand_constraints(batch.name, batch.generator, env, var_table)
        except EvalError as exc:
            raise ModelBuildError(where, exc) from exc
        if not expanded:
            message = f"constraint batch {batch.name!r} expanded to zero constraints"
            log.warning(message)
            notes.append(message)
        for constraint in expanded:
            constraints.append(constraint)
            provenance[constraint.name] = (batch.name, constraint.binding)

    return ConcreteModel(
        variables=tuple(variables),
        objective=objective,
        sense=doc.objective.sense,
        constraints=tuple(constraints),
        provenance=provenance,
        solver_hint=model.solver_hint,
        notes=tuple(notes),
        key_fields={
            batch.name: {f.name: i for i, f in enumerate(batch.key)}
            for batch in doc.variable_batches
        },
    )
