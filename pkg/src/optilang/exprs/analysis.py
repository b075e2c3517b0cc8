"""Static analysis over expression ASTs."""

from __future__ import annotations

from .nodes import Expr, GeneratorExpr, Name, SelfAttr, children


def free_roots(ast: Expr) -> set[str]:
    """Names the expression needs defined as inputs or decision variables.

    Covers both ``self.<name>`` references and bare names, minus loop
    identifiers: a for-clause target shadows its name inside the clause
    body, the condition, and later clauses' iterables (the first
    iterable is evaluated in the outer scope).
    """
    roots: set[str] = set()
    _collect(ast, frozenset(), roots)
    return roots


def _collect(node: Expr, bound: frozenset[str], roots: set[str]) -> None:
    if isinstance(node, SelfAttr):
        roots.add(node.name)
        return
    if isinstance(node, Name):
        if node.ident not in bound:
            roots.add(node.ident)
        return
    if isinstance(node, GeneratorExpr):
        scope = set(bound)
        for clause in node.clauses:
            _collect(clause.iterable, frozenset(scope), roots)
            scope.update(clause.targets)
        inner = frozenset(scope)
        _collect(node.body, inner, roots)
        if node.condition is not None:
            _collect(node.condition, inner, roots)
        return
    for child in children(node):
        _collect(child, bound, roots)
