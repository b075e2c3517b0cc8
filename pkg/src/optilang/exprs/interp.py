"""Concrete evaluation of expressions over bound data tables.

This is the safe replacement for executing generated expression text:
the interpreter walks our own AST and resolves ``self.<name>`` against
an explicit environment, so nothing outside the closed grammar can run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

from .nodes import (
    BinOp,
    Call,
    Compare,
    Expr,
    ForClause,
    GeneratorExpr,
    MethodCall,
    Name,
    NumberLit,
    SelfAttr,
    StringLit,
    Subscript,
    UnaryNeg,
)

Scalar = Any  # str | int | float | bool


class EvalError(ValueError):
    """Base class for evaluation failures."""


class NameResolutionError(EvalError):
    pass


class KeyArityError(EvalError):
    pass


class MissingDataPairError(EvalError):
    def __init__(self, table: str, key: tuple):
        super().__init__(f"table {table!r} has no entry for key {key!r}")
        self.table = table
        self.key = key


class EvalTypeError(EvalError):
    pass


class Table:
    """Ordered mapping from composite keys to composite values.

    Keys and values are tuples internally; arity-1 keys and values are
    exposed as scalars (``for i in self.costs`` iterates scalar food
    names, ``self.costs[i]`` yields the scalar cost).
    """

    def __init__(
        self,
        name: str,
        key_arity: int,
        value_arity: int,
        rows: list[tuple[tuple, tuple]] | None = None,
    ):
        self.name = name
        self.key_arity = key_arity
        self.value_arity = value_arity
        self._rows: dict[tuple, tuple] = {}
        for key, value in rows or []:
            self.put(key, value)

    def put(self, key: tuple, value: tuple) -> None:
        if len(key) != self.key_arity:
            raise KeyArityError(
                f"table {self.name!r} expects {self.key_arity}-part keys, got {key!r}"
            )
        self._rows[tuple(key)] = tuple(value)

    def lookup(self, key: tuple) -> Scalar | tuple:
        if len(key) != self.key_arity:
            raise KeyArityError(
                f"table {self.name!r} expects {self.key_arity}-part keys, got {key!r}"
            )
        value = self._rows[tuple(key)]
        return value[0] if self.value_arity == 1 else value

    def __contains__(self, key: tuple) -> bool:
        return tuple(key) in self._rows

    def __len__(self) -> int:
        return len(self._rows)

    def keys(self) -> list:
        if self.key_arity == 1:
            return [k[0] for k in self._rows]
        return list(self._rows)

    def values(self) -> list:
        if self.value_arity == 1:
            return [v[0] for v in self._rows.values()]
        return list(self._rows.values())

    def items(self) -> list:
        return list(zip(self.keys(), self.values()))

    def __iter__(self) -> Iterator:
        # iterating a table yields its keys in insertion order
        return iter(self.keys())


@dataclass
class DataEnv:
    """Evaluation environment: named tables plus current loop bindings."""

    tables: dict[str, Table] = field(default_factory=dict)
    bindings: dict[str, Scalar | tuple] = field(default_factory=dict)
    missing_policy: str = "error"  # or "zero"

    def child(self, new_bindings: dict[str, Scalar | tuple]) -> "DataEnv":
        merged = dict(self.bindings)
        merged.update(new_bindings)
        return DataEnv(self.tables, merged, self.missing_policy)


def eval_concrete(ast: Expr, env: DataEnv) -> Any:
    """Evaluate an expression that references no decision variables."""
    return _eval(ast, env)


def _eval(node: Expr, env: DataEnv) -> Any:
    if isinstance(node, NumberLit):
        return node.value
    if isinstance(node, StringLit):
        return node.value
    if isinstance(node, Name):
        if node.ident in env.bindings:
            return env.bindings[node.ident]
        if node.ident in env.tables:
            return env.tables[node.ident]
        raise NameResolutionError(f"unknown name {node.ident!r}")
    if isinstance(node, SelfAttr):
        if node.name in env.tables:
            return env.tables[node.name]
        raise NameResolutionError(f"unknown reference self.{node.name}")
    if isinstance(node, Subscript):
        return _subscript(node, env)
    if isinstance(node, BinOp):
        return _binop(node.op, _eval(node.left, env), _eval(node.right, env))
    if isinstance(node, UnaryNeg):
        value = _eval(node.operand, env)
        _require_number(value, "unary minus")
        return -value
    if isinstance(node, Compare):
        return _compare(node.op, _eval(node.left, env), _eval(node.right, env))
    if isinstance(node, Call):
        return _call(node, env)
    if isinstance(node, MethodCall):
        base = _eval(node.base, env)
        if not isinstance(base, Table):
            raise EvalTypeError(f".{node.method}() applies to data tables only")
        return getattr(base, node.method)()
    if isinstance(node, GeneratorExpr):
        return [ _eval(node.body, bound) for bound in iter_bindings(node, env) ]
    raise EvalTypeError(f"cannot evaluate node {type(node).__name__}")


def iter_bindings(gen: GeneratorExpr, env: DataEnv) -> Iterator[DataEnv]:
    """Environments for each generated binding combination, filter applied."""
    for bound in _expand_clauses(gen.clauses, env):
        if gen.condition is not None and not _eval(gen.condition, bound):
            continue
        yield bound


def binding_values(gen: GeneratorExpr, outer: DataEnv, bound: DataEnv) -> tuple:
    """The values bound to the generator's targets, in declaration order."""
    out = []
    for clause in gen.clauses:
        for target in clause.targets:
            out.append(bound.bindings[target])
    return tuple(out)


def _expand_clauses(clauses: tuple[ForClause, ...], env: DataEnv) -> Iterator[DataEnv]:
    if not clauses:
        yield env
        return
    head, rest = clauses[0], clauses[1:]
    iterable = _eval(head.iterable, env)
    for item in _iterate(iterable):
        yield from _expand_clauses(rest, env.child(_bind_targets(head.targets, item)))


def _bind_targets(targets: tuple[str, ...], item: Any) -> dict[str, Any]:
    if len(targets) == 1:
        return {targets[0]: item}
    if not isinstance(item, tuple) or len(item) != len(targets):
        raise KeyArityError(
            f"cannot unpack {item!r} into {len(targets)} loop variables"
        )
    return dict(zip(targets, item))


def _iterate(value: Any) -> Iterator:
    if isinstance(value, Table):
        return iter(value)
    if isinstance(value, (list, tuple)):
        return iter(value)
    raise EvalTypeError(f"{type(value).__name__} is not iterable")


def _subscript(node: Subscript, env: DataEnv) -> Any:
    base = _eval(node.base, env)
    key_parts = [_eval(k, env) for k in node.keys]
    if isinstance(base, Table):
        key = _composite_key(key_parts)
        if len(key) != base.key_arity:
            raise KeyArityError(
                f"table {base.name!r} expects {base.key_arity}-part keys, got {key!r}"
            )
        if key not in base:
            if env.missing_policy == "zero":
                return 0.0
            raise MissingDataPairError(base.name, key)
        return base.lookup(key)
    if isinstance(base, (list, tuple)):
        if len(key_parts) != 1 or not isinstance(key_parts[0], (int, float)):
            raise EvalTypeError("list indices must be single numbers")
        return base[int(key_parts[0])]
    raise EvalTypeError(f"{type(base).__name__} is not subscriptable")


def _composite_key(parts: list) -> tuple:
    # a single subscript argument that is already a tuple addresses a
    # multi-part key (the `self.flow[a] for a in self.arcs` idiom)
    if len(parts) == 1 and isinstance(parts[0], tuple):
        return parts[0]
    return tuple(parts)


def _binop(op: str, left: Any, right: Any) -> Any:
    if op == "+" and isinstance(left, list) and isinstance(right, list):
        return left + right
    _require_number(left, f"operator {op!r}")
    _require_number(right, f"operator {op!r}")
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if right == 0:
            raise EvalTypeError("division by zero")
        return left / right
    raise EvalTypeError(f"unknown operator {op!r}")


def _compare(op: str, left: Any, right: Any) -> bool:
    if op == "==":
        return left == right
    if op == "!=":
        return left != right
    both_numbers = _is_number(left) and _is_number(right)
    both_strings = isinstance(left, str) and isinstance(right, str)
    if not (both_numbers or both_strings):
        raise EvalTypeError(f"cannot order {type(left).__name__} and {type(right).__name__}")
    if op == "<=":
        return left <= right
    if op == ">=":
        return left >= right
    if op == "<":
        return left < right
    if op == ">":
        return left > right
    raise EvalTypeError(f"unknown comparison {op!r}")


def _call(node: Call, env: DataEnv) -> Any:
    values = [_eval(arg, env) for arg in node.args]
    func = node.func
    if func == "sum":
        items = _call_sequence(values, "sum")
        total = 0.0
        for item in items:
            _require_number(item, "sum")
            total += item
        return total
    if func in ("min", "max"):
        items = values if len(values) > 1 else _call_sequence(values, func)
        items = list(items)
        if not items:
            raise EvalTypeError(f"{func}() of an empty sequence")
        return min(items) if func == "min" else max(items)
    if func == "abs":
        if len(values) != 1:
            raise EvalTypeError("abs() takes one argument")
        _require_number(values[0], "abs")
        return abs(values[0])
    if func == "len":
        if len(values) != 1:
            raise EvalTypeError("len() takes one argument")
        target = values[0]
        if isinstance(target, (Table, list, tuple, str)):
            return len(target)
        raise EvalTypeError(f"len() of {type(target).__name__}")
    if func == "list":
        if len(values) != 1:
            raise EvalTypeError("list() takes one argument")
        return list(_iterate(values[0]))
    raise EvalTypeError(f"unknown function {func!r}")


def _call_sequence(values: list, func: str) -> list:
    if len(values) != 1:
        raise EvalTypeError(f"{func}() takes one iterable argument")
    target = values[0]
    if isinstance(target, (Table, list, tuple)):
        return list(_iterate(target))
    raise EvalTypeError(f"{func}() needs an iterable, got {type(target).__name__}")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _require_number(value: Any, where: str) -> None:
    if not _is_number(value):
        raise EvalTypeError(f"{where} needs a number, got {type(value).__name__}")
