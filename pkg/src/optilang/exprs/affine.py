"""Partial evaluation of expressions into affine form over decision variables.

Data references fold to constants, decision-variable references become
unit terms, and sums/products distribute. Anything that would leave the
affine world (a product of two variable terms, a variable divisor, a
variable inside ``abs``/``min``/``max``) raises NonlinearityError, which
keeps the solver interface purely linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

from .interp import (
    DataEnv,
    EvalError,
    KeyArityError,
    MissingDataPairError,
    NameResolutionError,
    Table,
    binding_values,
    eval_concrete,
    iter_bindings,
)
from .nodes import (
    CONSTRAINT_OPS,
    BinOp,
    Call,
    Compare,
    Expr,
    GeneratorExpr,
    Name,
    SelfAttr,
    Subscript,
    UnaryNeg,
    children,
)
from .parser import parse_expr


class LoweringError(EvalError):
    """Expression cannot be lowered to affine form."""


class NonlinearityError(LoweringError):
    pass


@dataclass
class AffineExpr:
    """constant + sum(coefficient * variable); zero coefficients are dropped."""

    constant: float = 0.0
    terms: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {vid: c for vid, c in self.terms.items() if c != 0.0}

    def add(self, other: "AffineExpr") -> "AffineExpr":
        terms = dict(self.terms)
        for vid, coeff in other.terms.items():
            terms[vid] = terms.get(vid, 0.0) + coeff
        return AffineExpr(self.constant + other.constant, terms)

    def sub(self, other: "AffineExpr") -> "AffineExpr":
        return self.add(other.scale(-1.0))

    def scale(self, factor: float) -> "AffineExpr":
        return AffineExpr(self.constant * factor, {v: c * factor for v, c in self.terms.items()})

    def evaluate(self, assignment: dict[int, float]) -> float:
        total = self.constant
        for vid, coeff in self.terms.items():
            total += coeff * assignment[vid]
        return total

    def is_constant(self) -> bool:
        return not self.terms


@dataclass(frozen=True)
class AffineConstraint:
    """Normalized constraint ``lhs op 0``."""

    name: str
    lhs: AffineExpr
    op: str  # <= >= ==
    binding: tuple[tuple[str, Any], ...] = ()

    def satisfied_by(self, assignment: dict[int, float], tol: float) -> bool:
        value = self.lhs.evaluate(assignment)
        if self.op == "<=":
            return value <= tol
        if self.op == ">=":
            return value >= -tol
        return abs(value) <= tol


class VarTable:
    """Lookup from (batch name, key tuple) to minted variable ids."""

    def __init__(self):
        self.batches: dict[str, dict[tuple, int]] = {}

    def add_batch(self, name: str) -> dict[tuple, int]:
        return self.batches.setdefault(name, {})

    def lookup(self, batch: str, key: tuple) -> int:
        try:
            return self.batches[batch][key]
        except KeyError:
            raise NameResolutionError(
                f"no decision variable {batch}[{','.join(map(str, key))}]"
            ) from None

    def __contains__(self, batch: str) -> bool:
        return batch in self.batches


def lower_affine(ast: Expr | str, env: DataEnv, vars: VarTable) -> AffineExpr:
    """Lower an expression to affine form; constants fold via the interpreter."""
    node = parse_expr(ast) if isinstance(ast, str) else ast
    return _as_affine(_lower(node, env, vars))


def expand_constraints(
    batch_name: str,
    generator: Expr | str,
    env: DataEnv,
    vars: VarTable,
) -> list[AffineConstraint]:
    """One affine constraint per generated binding combination.

    Accepts a single comparison or a generator expression whose body is a
    comparison; cartesian products of for-clauses are filtered by the
    optional if-clause. An all-filtered batch legally yields [].
    """
    node = parse_expr(generator) if isinstance(generator, str) else generator
    if isinstance(node, Compare):
        return [_constraint(batch_name, node, env, vars, ())]
    if isinstance(node, GeneratorExpr) and isinstance(node.body, Compare):
        out = []
        targets = [t for clause in node.clauses for t in clause.targets]
        for bound in iter_bindings(node, env):
            values = binding_values(node, env, bound)
            label = f"{batch_name}[{_label(values)}]"
            out.append(_constraint(label, node.body, bound, vars, tuple(zip(targets, values))))
        return out
    raise LoweringError(
        f"constraint batch {batch_name!r} must be a comparison or a generator of comparisons"
    )


def _constraint(
    name: str,
    node: Compare,
    env: DataEnv,
    vars: VarTable,
    binding: tuple[tuple[str, Any], ...],
) -> AffineConstraint:
    if node.op not in CONSTRAINT_OPS:
        raise LoweringError(f"constraint {name!r} uses {node.op!r}; only <=, >=, == are solvable")
    try:
        lhs = _as_affine(_lower(node.left, env, vars)).sub(
            _as_affine(_lower(node.right, env, vars))
        )
    except EvalError as exc:
        exc.args = (f"{exc} (while expanding constraint {name!r})",)
        raise
    return AffineConstraint(name, lhs, node.op, binding)


def _label(values: tuple) -> str:
    flat: list[str] = []
    for value in values:
        if isinstance(value, tuple):
            flat.extend(str(v) for v in value)
        else:
            flat.append(str(value))
    return ",".join(flat)


def _as_affine(value: Any) -> AffineExpr:
    if isinstance(value, AffineExpr):
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise LoweringError(f"expected a numeric expression, got {type(value).__name__}")
    return AffineExpr(float(value))


def _lower(node: Expr, env: DataEnv, vars: VarTable) -> Any:
    if not _mentions_vars(node, env, vars, set(env.bindings)):
        return eval_concrete(node, env)

    if isinstance(node, (SelfAttr, Name)):
        root = node.name if isinstance(node, SelfAttr) else node.ident
        raise LoweringError(f"decision-variable batch {root!r} must be subscripted")
    if isinstance(node, Subscript):
        return _lower_subscript(node, env, vars)
    if isinstance(node, UnaryNeg):
        return _as_affine(_lower(node.operand, env, vars)).scale(-1.0)
    if isinstance(node, BinOp):
        return _lower_binop(node, env, vars)
    if isinstance(node, Call):
        return _lower_call(node, env, vars)
    if isinstance(node, GeneratorExpr):
        raise LoweringError("a variable-carrying generator is only usable inside sum(...)")
    if isinstance(node, Compare):
        raise LoweringError("a comparison is not a value; use it as a constraint")
    raise LoweringError(f"cannot lower node {type(node).__name__}")


def _lower_subscript(node: Subscript, env: DataEnv, vars: VarTable) -> Any:
    root = _batch_root(node.base, env, vars)
    if root is None:
        # base is data; a variable must then be hiding in the key position
        raise NonlinearityError("decision variables cannot be used as subscript keys")
    for key_expr in node.keys:
        if _mentions_vars(key_expr, env, vars, set(env.bindings)):
            raise NonlinearityError("decision variables cannot be used as subscript keys")
    parts = [eval_concrete(k, env) for k in node.keys]
    if len(parts) == 1 and isinstance(parts[0], tuple):
        key = parts[0]
    else:
        key = tuple(parts)
    return AffineExpr(0.0, {vars.lookup(root, key): 1.0})


def _batch_root(base: Expr, env: DataEnv, vars: VarTable) -> str | None:
    if isinstance(base, SelfAttr) and base.name in vars:
        return base.name
    if isinstance(base, Name) and base.ident in vars and base.ident not in env.bindings:
        return base.ident
    return None


def _lower_binop(node: BinOp, env: DataEnv, vars: VarTable) -> Any:
    left = _lower(node.left, env, vars)
    right = _lower(node.right, env, vars)
    if node.op == "+":
        return _as_affine(left).add(_as_affine(right))
    if node.op == "-":
        return _as_affine(left).sub(_as_affine(right))
    if node.op == "*":
        lhs, rhs = _as_affine(left), _as_affine(right)
        if not lhs.is_constant() and not rhs.is_constant():
            raise NonlinearityError("product of two decision-variable expressions")
        if lhs.is_constant():
            return rhs.scale(lhs.constant)
        return lhs.scale(rhs.constant)
    if node.op == "/":
        divisor = _as_affine(right)
        if not divisor.is_constant():
            raise NonlinearityError("division by a decision-variable expression")
        if divisor.constant == 0.0:
            raise LoweringError("division by zero")
        return _as_affine(left).scale(1.0 / divisor.constant)
    raise LoweringError(f"unknown operator {node.op!r}")


def _lower_call(node: Call, env: DataEnv, vars: VarTable) -> Any:
    if node.func == "sum":
        if len(node.args) == 1 and isinstance(node.args[0], GeneratorExpr):
            gen = node.args[0]
            total = AffineExpr()
            for bound in iter_bindings(gen, env):
                total = total.add(_as_affine(_lower(gen.body, bound, vars)))
            return total
        raise NonlinearityError(
            "sum over decision variables must use a generator expression"
        )
    raise NonlinearityError(f"decision variable inside nonlinear call {node.func}()")


def _mentions_vars(node: Expr, env: DataEnv, vars: VarTable, bound: set[str]) -> bool:
    if isinstance(node, SelfAttr):
        return node.name in vars
    if isinstance(node, Name):
        return node.ident in vars and node.ident not in bound
    if isinstance(node, GeneratorExpr):
        scope = set(bound)
        for clause in node.clauses:
            if _mentions_vars(clause.iterable, env, vars, scope):
                return True
            scope.update(clause.targets)
        if node.condition is not None and _mentions_vars(node.condition, env, vars, scope):
            return True
        return _mentions_vars(node.body, env, vars, scope)
    return any(_mentions_vars(child, env, vars, bound) for child in children(node))


__all__ = [
    "AffineConstraint",
    "AffineExpr",
    "LoweringError",
    "NonlinearityError",
    "VarTable",
    "expand_constraints",
    "lower_affine",
    "KeyArityError",
    "MissingDataPairError",
    "NameResolutionError",
    "Table",
    "DataEnv",
]
