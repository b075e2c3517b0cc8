"""AST node types for the expression mini-language.

The language covers exactly what model documents need: literals, data
references (``self.name``), subscripts with single or tuple keys, the four
arithmetic operators, a single comparison, a small builtin-call set,
``.keys()/.values()/.items()`` on data references, and generator
expressions with one optional trailing ``if``.
"""

from __future__ import annotations

from dataclasses import dataclass


class Expr:
    """Base class for all expression nodes. Instances are immutable."""

    __slots__ = ()


@dataclass(frozen=True)
class NumberLit(Expr):
    value: float


@dataclass(frozen=True)
class StringLit(Expr):
    value: str


@dataclass(frozen=True)
class Name(Expr):
    ident: str


@dataclass(frozen=True)
class SelfAttr(Expr):
    """A ``self.<name>`` reference to a declared input or variable batch."""

    name: str


@dataclass(frozen=True)
class Subscript(Expr):
    base: Expr
    keys: tuple[Expr, ...]


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr


@dataclass(frozen=True)
class UnaryNeg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Compare(Expr):
    """Exactly one comparison; chained comparisons are rejected by the parser."""

    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str  # restricted to BUILTIN_FUNCS
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class MethodCall(Expr):
    method: str  # restricted to TABLE_METHODS
    base: Expr


@dataclass(frozen=True)
class ForClause:
    targets: tuple[str, ...]
    iterable: Expr


@dataclass(frozen=True)
class GeneratorExpr(Expr):
    body: Expr
    clauses: tuple[ForClause, ...]
    condition: Expr | None = None


BUILTIN_FUNCS = frozenset({"sum", "min", "max", "abs", "len", "list"})
TABLE_METHODS = frozenset({"keys", "values", "items"})
COMPARE_OPS = ("<=", ">=", "==", "!=", "<", ">")
CONSTRAINT_OPS = frozenset({"<=", ">=", "=="})


def children(node: Expr) -> tuple[Expr, ...]:
    """Direct sub-expressions of a node, in source order."""
    if isinstance(node, Subscript):
        return (node.base, *node.keys)
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, UnaryNeg):
        return (node.operand,)
    if isinstance(node, Compare):
        return (node.left, node.right)
    if isinstance(node, Call):
        return node.args
    if isinstance(node, MethodCall):
        return (node.base,)
    if isinstance(node, GeneratorExpr):
        out: list[Expr] = [node.body]
        out.extend(clause.iterable for clause in node.clauses)
        if node.condition is not None:
            out.append(node.condition)
        return tuple(out)
    return ()
