"""Model-document grammar: typed parse of model YAML, serialization, diffing.

A model document has exactly the top-level sections ``InputData``,
``VariableBatch``, ``Objective``, ``ConstraintBatch`` and an optional
``Solver`` hint. Structural conformance is checked here (all violations
are collected, not just the first); semantic checks such as duplicate or
undefined names belong to the validator.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields
from typing import Any

import yaml

from .exprs import Compare, GeneratorExpr, ParseError, parse_expr

SCALAR_TYPES = ("str", "int", "integer", "float", "bool")
VTYPES = ("C", "I", "B")
SENSES = ("min", "max")
SOLVER_HINTS = ("lp", "milp", "auto")

TOP_LEVEL_KEYS = ("InputData", "VariableBatch", "Objective", "ConstraintBatch", "Solver")
INPUT_ENTRY_KEYS = ("desc", "key", "value")
VARIABLE_ENTRY_KEYS = ("desc", "name", "key", "value", "indices", "vtype", "lower_bound", "upper_bound")
OBJECTIVE_KEYS = ("desc", "constructor", "sense")
CONSTRAINT_ENTRY_KEYS = ("desc", "name", "generator")

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class SchemaViolation:
    path: str
    kind: str  # UnknownProperty | MissingProperty | WrongType | BadEnumValue
    message: str

    def to_json_dict(self) -> dict:
        return {"path": self.path, "kind": self.kind, "message": self.message}


class DocumentError(ValueError):
    """Parse rejected the document; carries every violation found."""

    def __init__(self, violations: list[SchemaViolation]):
        super().__init__("; ".join(f"{v.path}: {v.message}" for v in violations))
        self.violations = violations


@dataclass(frozen=True)
class Field:
    name: str
    type: str  # one of str/int/float/bool after normalization


@dataclass(frozen=True)
class InputDataDecl:
    name: str
    desc: str
    key: tuple[Field, ...]
    value: tuple[Field, ...]


@dataclass(frozen=True)
class VariableBatchDecl:
    name: str
    desc: str
    key: tuple[Field, ...]
    value: tuple[Field, ...]
    indices: str
    vtype: str
    lower_bound: float
    upper_bound: float


@dataclass(frozen=True)
class ObjectiveDecl:
    desc: str
    constructor: str
    sense: str


@dataclass(frozen=True)
class ConstraintBatchDecl:
    name: str
    desc: str
    generator: str


@dataclass(frozen=True, eq=False)
class ModelDocument:
    input_data: tuple[InputDataDecl, ...]
    variable_batches: tuple[VariableBatchDecl, ...]
    objective: ObjectiveDecl
    constraint_batches: tuple[ConstraintBatchDecl, ...]
    solver_hint: str | None = None

    def input_map(self) -> dict[str, InputDataDecl]:
        return {decl.name: decl for decl in self.input_data}

    def __eq__(self, other: object) -> bool:
        # InputData is a mapping: generation order is unstable, so
        # equality ignores its entry order (batch lists stay ordered)
        if not isinstance(other, ModelDocument):
            return NotImplemented
        return (
            self.input_map() == other.input_map()
            and self.variable_batches == other.variable_batches
            and self.objective == other.objective
            and self.constraint_batches == other.constraint_batches
            and self.solver_hint == other.solver_hint
        )

    __hash__ = None  # type: ignore[assignment]


# parsing


def parse_model_yaml(text: str) -> ModelDocument:
    """Parse model YAML into a typed document; raises DocumentError with
    every violation found when the text does not fit the grammar."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise DocumentError(
            [SchemaViolation("$", "WrongType", f"not parseable as YAML: {exc}")]
        ) from exc
    violations: list[SchemaViolation] = []
    doc = _build_document(data, violations)
    if violations:
        raise DocumentError(violations)
    assert doc is not None
    return doc


def _build_document(data: Any, out: list[SchemaViolation]) -> ModelDocument | None:
    if not isinstance(data, dict):
        out.append(SchemaViolation("$", "WrongType", "document must be a mapping"))
        return None
    for key in data:
        if key not in TOP_LEVEL_KEYS:
            out.append(SchemaViolation(str(key), "UnknownProperty", f"unknown section {key!r}"))
    for key in ("InputData", "VariableBatch", "Objective", "ConstraintBatch"):
        if key not in data:
            out.append(SchemaViolation(key, "MissingProperty", f"missing section {key!r}"))

    inputs = _parse_input_section(data.get("InputData"), out)
    variables = _parse_variable_section(data.get("VariableBatch"), out)
    objective = _parse_objective(data.get("Objective"), out)
    constraints = _parse_constraint_section(data.get("ConstraintBatch"), out)
    hint = _parse_solver_hint(data.get("Solver"), "Solver" in data, out)

    if out or objective is None:
        return None
    return ModelDocument(tuple(inputs), tuple(variables), objective, tuple(constraints), hint)


def _parse_input_section(section: Any, out: list[SchemaViolation]) -> list[InputDataDecl]:
    if section is None:
        return []
    if not isinstance(section, dict):
        out.append(SchemaViolation("InputData", "WrongType", "InputData must be a mapping"))
        return []
    decls = []
    for name, body in section.items():
        path = f"InputData.{name}"
        _check_identifier(name, path, out)
        if not isinstance(body, dict):
            out.append(SchemaViolation(path, "WrongType", "entry must be a mapping"))
            continue
        _check_keys(body, INPUT_ENTRY_KEYS, INPUT_ENTRY_KEYS, path, out)
        desc = _get_str(body, "desc", path, out)
        key_fields = _parse_fields(body.get("key"), f"{path}.key", out)
        value_fields = _parse_fields(body.get("value"), f"{path}.value", out)
        if desc is None or key_fields is None or value_fields is None:
            continue
        decls.append(InputDataDecl(str(name), desc, key_fields, value_fields))
    return decls


def _parse_variable_section(section: Any, out: list[SchemaViolation]) -> list[VariableBatchDecl]:
    if section is None:
        return []
    if not isinstance(section, list):
        out.append(SchemaViolation("VariableBatch", "WrongType", "VariableBatch must be a list"))
        return []
    decls = []
    for idx, body in enumerate(section):
        path = f"VariableBatch[{idx}]"
        if not isinstance(body, dict):
            out.append(SchemaViolation(path, "WrongType", "entry must be a mapping"))
            continue
        _check_keys(body, VARIABLE_ENTRY_KEYS, VARIABLE_ENTRY_KEYS, path, out)
        name = _get_str(body, "name", path, out)
        if name is not None:
            _check_identifier(name, f"{path}.name", out)
        desc = _get_str(body, "desc", path, out)
        key_fields = _parse_fields(body.get("key"), f"{path}.key", out) if "key" in body else None
        value_fields = (
            _parse_fields(body.get("value"), f"{path}.value", out) if "value" in body else None
        )
        indices = _get_expression(body, "indices", path, out)
        vtype = _get_enum(body, "vtype", VTYPES, path, out)
        lower = _parse_bound(body, "lower_bound", path, out)
        upper = _parse_bound(body, "upper_bound", path, out)
        if None in (name, desc, key_fields, value_fields, indices, vtype, lower, upper):
            continue
        if lower > upper:
            out.append(
                SchemaViolation(
                    f"{path}.lower_bound",
                    "WrongType",
                    f"lower_bound {lower} exceeds upper_bound {upper}",
                )
            )
            continue
        decls.append(
            VariableBatchDecl(name, desc, key_fields, value_fields, indices, vtype, lower, upper)
        )
    return decls


def _parse_objective(section: Any, out: list[SchemaViolation]) -> ObjectiveDecl | None:
    if section is None:
        return None
    if not isinstance(section, dict):
        out.append(SchemaViolation("Objective", "WrongType", "Objective must be a mapping"))
        return None
    path = "Objective"
    _check_keys(section, OBJECTIVE_KEYS, OBJECTIVE_KEYS, path, out)
    desc = _get_str(section, "desc", path, out)
    constructor = _get_expression(section, "constructor", path, out)
    sense = _get_enum(section, "sense", SENSES, path, out)
    if None in (desc, constructor, sense):
        return None
    return ObjectiveDecl(desc, constructor, sense)


def _parse_constraint_section(section: Any, out: list[SchemaViolation]) -> list[ConstraintBatchDecl]:
    if section is None:
        return []
    if not isinstance(section, list):
        out.append(SchemaViolation("ConstraintBatch", "WrongType", "ConstraintBatch must be a list"))
        return []
    decls = []
    for idx, body in enumerate(section):
        path = f"ConstraintBatch[{idx}]"
        if not isinstance(body, dict):
            out.append(SchemaViolation(path, "WrongType", "entry must be a mapping"))
            continue
        _check_keys(body, CONSTRAINT_ENTRY_KEYS, CONSTRAINT_ENTRY_KEYS, path, out)
        name = _get_str(body, "name", path, out)
        if name is not None:
            _check_identifier(name, f"{path}.name", out)
        desc = _get_str(body, "desc", path, out)
        generator = _get_expression(body, "generator", path, out, constraint=True)
        if None in (name, desc, generator):
            continue
        decls.append(ConstraintBatchDecl(name, desc, generator))
    return decls


def _parse_solver_hint(value: Any, present: bool, out: list[SchemaViolation]) -> str | None:
    if not present:
        return None
    if not isinstance(value, str) or value not in SOLVER_HINTS:
        out.append(
            SchemaViolation(
                "Solver", "BadEnumValue", f"Solver must be one of {SOLVER_HINTS}, got {value!r}"
            )
        )
        return None
    return value


def _check_keys(
    body: dict, allowed: tuple[str, ...], required: tuple[str, ...], path: str, out: list
) -> None:
    for key in body:
        if key not in allowed:
            out.append(
                SchemaViolation(f"{path}.{key}", "UnknownProperty", f"unknown property {key!r}")
            )
    for key in required:
        if key not in body:
            out.append(
                SchemaViolation(f"{path}.{key}", "MissingProperty", f"missing property {key!r}")
            )


def _check_identifier(name: Any, path: str, out: list) -> None:
    if not isinstance(name, str) or not _IDENT_RE.match(name):
        out.append(SchemaViolation(path, "WrongType", f"{name!r} is not a valid identifier"))


def _get_str(body: dict, key: str, path: str, out: list) -> str | None:
    if key not in body:
        return None  # MissingProperty already recorded
    value = body[key]
    if not isinstance(value, str):
        out.append(SchemaViolation(f"{path}.{key}", "WrongType", f"{key} must be text"))
        return None
    return value


def _get_enum(body: dict, key: str, allowed: tuple[str, ...], path: str, out: list) -> str | None:
    if key not in body:
        return None
    value = body[key]
    if not isinstance(value, str) or value not in allowed:
        out.append(
            SchemaViolation(
                f"{path}.{key}", "BadEnumValue", f"{key} must be one of {allowed}, got {value!r}"
            )
        )
        return None
    return value


def _get_expression(
    body: dict, key: str, path: str, out: list, constraint: bool = False
) -> str | None:
    if key not in body:
        return None
    value = body[key]
    if not isinstance(value, str):
        out.append(SchemaViolation(f"{path}.{key}", "WrongType", f"{key} must be expression text"))
        return None
    # YAML folding leaves line-continuation backslashes in the text;
    # store the canonical single-line form
    value = re.sub(r"\s*\\\s*", " ", value).strip()
    try:
        ast = parse_expr(value)
    except ParseError as exc:
        out.append(SchemaViolation(f"{path}.{key}", "WrongType", f"expression error: {exc}"))
        return None
    if constraint:
        ok = isinstance(ast, Compare) or (
            isinstance(ast, GeneratorExpr) and isinstance(ast.body, Compare)
        )
        if not ok:
            out.append(
                SchemaViolation(
                    f"{path}.{key}",
                    "WrongType",
                    "generator must be a comparison or a generator of comparisons",
                )
            )
            return None
    return value


def _parse_fields(value: Any, path: str, out: list) -> tuple[Field, ...] | None:
    if value is None:
        return None
    if not isinstance(value, list) or not value:
        out.append(SchemaViolation(path, "WrongType", "must be a non-empty list of field: type"))
        return None
    parsed = []
    for idx, item in enumerate(value):
        item_path = f"{path}[{idx}]"
        if not isinstance(item, dict) or len(item) != 1:
            out.append(
                SchemaViolation(item_path, "WrongType", "field entry must be one `name: type` pair")
            )
            return None
        (fname, ftype), = item.items()
        _check_identifier(fname, item_path, out)
        if not isinstance(ftype, str) or ftype not in SCALAR_TYPES:
            out.append(
                SchemaViolation(
                    item_path, "BadEnumValue", f"scalar type must be one of {SCALAR_TYPES}"
                )
            )
            return None
        parsed.append(Field(str(fname), "int" if ftype == "integer" else ftype))
    return tuple(parsed)


def _parse_bound(body: dict, key: str, path: str, out: list) -> float | None:
    if key not in body:
        return None
    value = body[key]
    if isinstance(value, str):
        lowered = value.strip().lower().lstrip("+")
        if lowered in ("inf", ".inf", "infinity"):
            return math.inf
        if lowered in ("-inf", "-.inf", "-infinity"):
            return -math.inf
        out.append(SchemaViolation(f"{path}.{key}", "WrongType", f"{key} must be a number or inf"))
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        out.append(SchemaViolation(f"{path}.{key}", "WrongType", f"{key} must be a number or inf"))
        return None
    return float(value)


# serialization


def serialize_model_yaml(doc: ModelDocument) -> str:
    """Emit YAML that re-parses to an equal document.

    Section order is fixed (InputData, VariableBatch, Objective,
    ConstraintBatch, Solver) and per-entry keys are normalized to the
    grammar's order; InputData entry order is preserved as parsed.
    """
    data: dict[str, Any] = {
        "InputData": {
            decl.name: {
                "desc": decl.desc,
                "key": [{f.name: f.type} for f in decl.key],
                "value": [{f.name: f.type} for f in decl.value],
            }
            for decl in doc.input_data
        },
        "VariableBatch": [
            {
                "desc": decl.desc,
                "name": decl.name,
                "key": [{f.name: f.type} for f in decl.key],
                "value": [{f.name: f.type} for f in decl.value],
                "indices": decl.indices,
                "vtype": decl.vtype,
                "lower_bound": _bound_scalar(decl.lower_bound),
                "upper_bound": _bound_scalar(decl.upper_bound),
            }
            for decl in doc.variable_batches
        ],
        "Objective": {
            "desc": doc.objective.desc,
            "constructor": doc.objective.constructor,
            "sense": doc.objective.sense,
        },
        "ConstraintBatch": [
            {"desc": decl.desc, "name": decl.name, "generator": decl.generator}
            for decl in doc.constraint_batches
        ],
    }
    if doc.solver_hint is not None:
        data["Solver"] = doc.solver_hint
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=False, width=10_000)


def _bound_scalar(value: float) -> Any:
    if value == math.inf:
        return "inf"
    if value == -math.inf:
        return "-inf"
    if value == int(value):
        return int(value)
    return value


# diffing


@dataclass(frozen=True)
class DocChange:
    path: str
    kind: str  # Added | Removed | Changed | Reordered
    before: Any
    after: Any

    def to_json_dict(self) -> dict:
        return {
            "path": self.path,
            "kind": self.kind,
            "before": _change_payload(self.before),
            "after": _change_payload(self.after),
        }


def _change_payload(value: Any) -> Any:
    if value is None or isinstance(value, (str, int, float, list)):
        return value
    return _decl_dict(value)


def _decl_dict(decl: Any) -> Any:
    if isinstance(decl, tuple):
        return [_decl_dict(d) for d in decl]
    if isinstance(decl, Field):
        return {decl.name: decl.type}
    out = {}
    for f in fields(decl):
        value = getattr(decl, f.name)
        if isinstance(value, tuple):
            out[f.name] = [_decl_dict(v) for v in value]
        else:
            out[f.name] = value
    return out


def diff_documents(a: ModelDocument, b: ModelDocument) -> list[DocChange]:
    """Changes turning ``a`` into ``b``; empty iff the documents are equal."""
    changes: list[DocChange] = []
    _diff_entries("InputData", list(a.input_data), list(b.input_data), changes, ordered=False)
    _diff_entries("VariableBatch", list(a.variable_batches), list(b.variable_batches), changes)
    _diff_entries("ConstraintBatch", list(a.constraint_batches), list(b.constraint_batches), changes)
    for f in fields(ObjectiveDecl):
        before = getattr(a.objective, f.name)
        after = getattr(b.objective, f.name)
        if before != after:
            changes.append(DocChange(f"Objective.{f.name}", "Changed", before, after))
    if a.solver_hint != b.solver_hint:
        kind = "Added" if a.solver_hint is None else "Removed" if b.solver_hint is None else "Changed"
        changes.append(DocChange("Solver", kind, a.solver_hint, b.solver_hint))
    return changes


def _diff_entries(
    section: str, old: list, new: list, changes: list[DocChange], ordered: bool = True
) -> None:
    old_by_name = {d.name: d for d in old}
    new_by_name = {d.name: d for d in new}
    for name, decl in old_by_name.items():
        if name not in new_by_name:
            changes.append(DocChange(f"{section}[{name}]", "Removed", decl, None))
    for idx, decl in enumerate(new):
        if decl.name not in old_by_name:
            changes.append(DocChange(f"{section}[{idx}]", "Added", None, decl))
    for name, decl in old_by_name.items():
        counterpart = new_by_name.get(name)
        if counterpart is None or counterpart == decl:
            continue
        for f in fields(decl):
            before = getattr(decl, f.name)
            after = getattr(counterpart, f.name)
            if before != after:
                changes.append(DocChange(f"{section}[{name}].{f.name}", "Changed", before, after))
    if ordered:
        # order after removals and positional insertions; a Reordered
        # change carries the full target order when that is not enough
        simulated = [d.name for d in old if d.name in new_by_name]
        for idx, decl in enumerate(new):
            if decl.name not in old_by_name:
                simulated.insert(min(idx, len(simulated)), decl.name)
        target = [d.name for d in new]
        if simulated != target:
            changes.append(DocChange(section, "Reordered", simulated, target))


def patch_document(doc: ModelDocument, changes: list[DocChange]) -> ModelDocument:
    """Apply a diff produced by diff_documents; patch(a, diff(a, b)) == b."""
    inputs = {d.name: d for d in doc.input_data}
    variables = list(doc.variable_batches)
    constraints = list(doc.constraint_batches)
    objective = doc.objective
    hint = doc.solver_hint

    sections: dict[str, list] = {"VariableBatch": variables, "ConstraintBatch": constraints}
    order_overrides: dict[str, list[str]] = {}

    for change in changes:
        if change.path == "Solver":
            hint = change.after
            continue
        if change.path.startswith("Objective."):
            field_name = change.path.split(".", 1)[1]
            objective = _replace_field(objective, field_name, change.after)
            continue
        if change.kind == "Reordered":
            order_overrides[change.path] = change.after
            continue
        section, name, field_name = _split_path(change.path)
        if section == "InputData":
            if change.kind == "Removed":
                inputs.pop(name, None)
            elif change.kind == "Added":
                inputs[change.after.name] = change.after
            else:
                decl = inputs[name]
                inputs[name] = _replace_field(decl, field_name, change.after)
            continue
        entries = sections[section]
        if change.kind == "Removed":
            entries[:] = [d for d in entries if d.name != name]
        elif change.kind == "Added":
            entries.insert(min(int(name), len(entries)), change.after)
        else:
            for i, d in enumerate(entries):
                if d.name == name:
                    entries[i] = _replace_field(d, field_name, change.after)

    for section, order in order_overrides.items():
        entries = sections[section]
        by_name = {d.name: d for d in entries}
        ordered = [by_name[n] for n in order if n in by_name]
        rest = [d for d in entries if d.name not in set(order)]
        entries[:] = ordered + rest

    return ModelDocument(
        tuple(inputs.values()), tuple(variables), objective, tuple(constraints), hint
    )


def _split_path(path: str) -> tuple[str, str, str | None]:
    m = re.match(r"^(\w+)\[([^\]]+)\](?:\.(\w+))?$", path)
    if not m:
        raise ValueError(f"unsupported change path {path!r}")
    return m.group(1), m.group(2), m.group(3)


def _replace_field(decl: Any, field_name: str, value: Any) -> Any:
    kwargs = {f.name: getattr(decl, f.name) for f in fields(decl)}
    kwargs[field_name] = value
    return type(decl)(**kwargs)
