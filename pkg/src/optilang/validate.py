"""Post-generation validation pipeline for raw model YAML.

Order is fixed: code-fence stripping, property-name repair, enum repair,
expression repair, then parse + schema check, duplicate-name detection,
and undefined-name detection. Repairs are deterministic and conservative
(edit-distance 1 with a unique target; semicolon strip; one missing
closing paren) — everything else is irreparable and reported as such.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import yaml

from .documents import (
    CONSTRAINT_ENTRY_KEYS,
    INPUT_ENTRY_KEYS,
    OBJECTIVE_KEYS,
    SENSES,
    TOP_LEVEL_KEYS,
    VARIABLE_ENTRY_KEYS,
    VTYPES,
    DocumentError,
    ModelDocument,
    SchemaViolation,
    parse_model_yaml,
)
from .exprs import free_roots, parse_expr

_KEYWORDS = tuple(
    dict.fromkeys(
        TOP_LEVEL_KEYS + INPUT_ENTRY_KEYS + VARIABLE_ENTRY_KEYS + OBJECTIVE_KEYS + CONSTRAINT_ENTRY_KEYS
    )
)
_EXPRESSION_KEYS = ("indices", "constructor", "generator")

_KEY_RE = re.compile(r"^(\s*(?:-\s+)?)([A-Za-z_][A-Za-z0-9_]*):(\s.*|)$")
_FENCE_RE = re.compile(r"^\s*```[\w-]*\s*$")


@dataclass(frozen=True)
class Correction:
    path: str  # line-oriented location, e.g. "line 3"
    kind: str  # PropertyNameFixed | EnumValueFixed | ExpressionRepaired | FenceStripped
    before: str
    after: str

    def to_json_dict(self) -> dict:
        return {"path": self.path, "kind": self.kind, "before": self.before, "after": self.after}


@dataclass(frozen=True)
class SemanticError:
    kind: str  # RedefinedVariable | UndefinedVariable
    name: str
    locations: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "name": self.name, "locations": list(self.locations)}


@dataclass
class ValidationReport:
    verdict: str  # Valid | Repaired | Irreparable
    corrections: list[Correction] = field(default_factory=list)
    violations: list[SchemaViolation] = field(default_factory=list)
    semantic_errors: list[SemanticError] = field(default_factory=list)
    document: ModelDocument | None = None
    corrected_text: str = ""

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "corrections": [c.to_json_dict() for c in self.corrections],
            "violations": [v.to_json_dict() for v in self.violations],
            "semantic_errors": [e.to_json_dict() for e in self.semantic_errors],
        }


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def _unique_repair(word: str, candidates: tuple[str, ...]) -> str | None:
    """The single nearest candidate within case-insensitive edit distance 1.

    Nearest-match semantics: an exact case-insensitive hit beats
    distance-1 ones; ambiguity at the minimal distance means no repair."""
    if word in candidates:
        return None
    distances = {c: levenshtein(word.lower(), c.lower()) for c in candidates}
    best = min(distances.values())
    if best > 1:
        return None
    matches = [c for c, d in distances.items() if d == best]
    if len(matches) == 1:
        return matches[0]
    return None


def autocorrect(raw: str) -> tuple[str, list[Correction]]:
    corrections: list[Correction] = []
    lines = raw.split("\n")
    lines = _strip_fences(lines, corrections)
    _fix_property_names(lines, corrections)
    _fix_enum_values(lines, corrections)
    _fix_expressions(lines, corrections)
    return "\n".join(lines), corrections


def _strip_fences(lines: list[str], corrections: list[Correction]) -> list[str]:
    significant = [i for i, line in enumerate(lines) if line.strip()]
    if not significant:
        return lines
    first, last = significant[0], significant[-1]
    if not _FENCE_RE.match(lines[first]):
        return lines
    stripped = []
    kept = list(lines)
    stripped.append(kept[first])
    kept[first] = None  # type: ignore[call-overload]
    if last != first and _FENCE_RE.match(lines[last]):
        stripped.append(kept[last])
        kept[last] = None  # type: ignore[call-overload]
    corrections.append(
        Correction(f"line {first + 1}", "FenceStripped", "\n".join(stripped), "")
    )
    return [line for line in kept if line is not None]


def _fix_property_names(lines: list[str], corrections: list[Correction]) -> None:
    for i, line in enumerate(lines):
        m = _KEY_RE.match(line)
        if not m:
            continue
        repaired = _unique_repair(m.group(2), _KEYWORDS)
        if repaired is None:
            continue
        lines[i] = f"{m.group(1)}{repaired}:{m.group(3)}"
        corrections.append(
            Correction(f"line {i + 1}", "PropertyNameFixed", m.group(2), repaired)
        )


def _fix_enum_values(lines: list[str], corrections: list[Correction]) -> None:
    enum_re = re.compile(r"^(\s*(?:-\s+)?)(sense|vtype):\s*(\S+)\s*$")
    for i, line in enumerate(lines):
        m = enum_re.match(line)
        if not m:
            continue
        allowed = SENSES if m.group(2) == "sense" else VTYPES
        repaired = _unique_repair(m.group(3), allowed)
        if repaired is None:
            continue
        lines[i] = f"{m.group(1)}{m.group(2)}: {repaired}"
        corrections.append(Correction(f"line {i + 1}", "EnumValueFixed", m.group(3), repaired))


def _fix_expressions(lines: list[str], corrections: list[Correction]) -> None:
    expr_re = re.compile(r"^(\s*(?:-\s+)?)(indices|constructor|generator):(.*)$")
    i = 0
    while i < len(lines):
        m = expr_re.match(lines[i])
        if not m:
            i += 1
            continue
        indent = len(m.group(1).expandtabs())
        start = i
        end = i + 1
        while end < len(lines) and _is_continuation(lines[end], indent):
            end += 1
        block = "\n".join([m.group(3)] + lines[start + 1 : end])
        repaired = _repair_expression(block)
        if repaired != block:
            corrections.append(
                Correction(f"line {start + 1}", "ExpressionRepaired", block.strip(), repaired.strip())
            )
            new_chunk = repaired.split("\n")
            lines[start] = f"{m.group(1)}{m.group(2)}:{new_chunk[0]}"
            lines[start + 1 : end] = new_chunk[1:]
            end = start + len(new_chunk)
        i = end


def _is_continuation(line: str, key_indent: int) -> bool:
    stripped = line.strip()
    if not stripped:
        return False
    indent = len(line) - len(line.lstrip())
    if indent <= key_indent:
        return False
    if stripped.startswith("- "):
        return False
    if re.match(r"^[A-Za-z_][A-Za-z0-9_]*:(\s|$)", stripped):
        return False
    return True


def _repair_expression(block: str) -> str:
    out = block
    stripped = out.rstrip()
    while stripped.endswith(";"):
        stripped = stripped[:-1].rstrip()
        out = stripped
    opens = closes = 0
    in_string: str | None = None
    for ch in out:
        if in_string:
            if ch == in_string:
                in_string = None
            continue
        if ch in ("'", '"'):
            in_string = ch
        elif ch == "(":
            opens += 1
        elif ch == ")":
            closes += 1
    if opens == closes + 1:
        out = out.rstrip() + ")"
    return out


def detect_redefinitions(doc: ModelDocument) -> list[SemanticError]:
    """One RedefinedVariable per name declared more than once across
    InputData and VariableBatch."""
    seen: dict[str, list[str]] = {}
    for decl in doc.input_data:
        seen.setdefault(decl.name, []).append(f"InputData.{decl.name}")
    for idx, decl in enumerate(doc.variable_batches):
        seen.setdefault(decl.name, []).append(f"VariableBatch[{idx}]")
    return [
        SemanticError("RedefinedVariable", name, tuple(locations))
        for name, locations in seen.items()
        if len(locations) > 1
    ]


def detect_undefined(doc: ModelDocument) -> list[SemanticError]:
    """Expression roots not declared as inputs or decision variables."""
    defined = {decl.name for decl in doc.input_data}
    defined.update(decl.name for decl in doc.variable_batches)
    hits: dict[str, list[str]] = {}
    for path, text in _expression_fields(doc):
        for root in sorted(free_roots(parse_expr(text))):
            if root not in defined:
                hits.setdefault(root, []).append(path)
    return [
        SemanticError("UndefinedVariable", name, tuple(locations))
        for name, locations in sorted(hits.items())
    ]


def _expression_fields(doc: ModelDocument):
    for idx, decl in enumerate(doc.variable_batches):
        yield f"VariableBatch[{idx}].indices", decl.indices
    yield "Objective.constructor", doc.objective.constructor
    for idx, decl in enumerate(doc.constraint_batches):
        yield f"ConstraintBatch[{idx}].generator", decl.generator


def validate_pipeline(raw: str) -> ValidationReport:
    """Full pipeline: autocorrect, parse, schema check, redefinitions,
    undefined roots. All failure is encoded in the report."""
    text, corrections = autocorrect(raw)
    report = ValidationReport(verdict="Irreparable", corrections=corrections, corrected_text=text)
    try:
        doc = parse_model_yaml(text)
    except DocumentError as exc:
        report.violations = exc.violations
        return report
    report.semantic_errors = detect_redefinitions(doc)
    if not report.semantic_errors:
        report.semantic_errors = detect_undefined(doc)
    if report.semantic_errors:
        return report
    report.document = doc
    report.verdict = "Repaired" if corrections else "Valid"
    return report


def parse_raw_yaml(text: str):
    """YAML syntax probe used by callers that only need well-formedness."""
    return yaml.safe_load(text)
