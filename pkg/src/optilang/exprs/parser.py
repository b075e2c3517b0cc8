"""Recursive-descent parser for the expression mini-language.

Grammar (informal):

    expr      = arith [ compop arith ]          ; exactly one comparison
    arith     = term { ("+" | "-") term }
    term      = factor { ("*" | "/") factor }
    factor    = "-" factor | postfix
    postfix   = atom { "[" arith {"," arith} "]" | "." method "(" ")" }
    atom      = NUMBER | STRING | name | "self" "." name
              | builtin "(" args ")" | "(" group ")"
    group     = expr [ forclause+ [ "if" expr ] ]
    args      = "" | expr [ forclause+ [ "if" expr ] ] | expr {"," expr}
    forclause = "for" targets "in" arith
    targets   = name {"," name} | "(" name {"," name} ")"

Anything outside the grammar (chained comparisons, lambdas, attribute
chains deeper than ``self.x``, calls to unknown functions) raises
ParseError with a position.
"""

from __future__ import annotations

from .lexer import ParseError, Token, tokenize
from .nodes import (
    BUILTIN_FUNCS,
    COMPARE_OPS,
    TABLE_METHODS,
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

_RESERVED = frozenset({"for", "in", "if", "self", "lambda", "and", "or", "not"})


def parse_expr(text: str) -> Expr:
    """Parse one expression; raises ParseError for anything off-grammar."""
    parser = _Parser(tokenize(text))
    node = parser.comparison()
    parser.expect_end()
    return node


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # token helpers

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def match_op(self, *ops: str) -> Token | None:
        tok = self.peek()
        if tok.kind == "OP" and tok.value in ops:
            return self.advance()
        return None

    def match_name(self, word: str) -> Token | None:
        tok = self.peek()
        if tok.kind == "NAME" and tok.value == word:
            return self.advance()
        return None

    def expect_op(self, op: str) -> Token:
        tok = self.peek()
        if tok.kind != "OP" or tok.value != op:
            raise ParseError(f"expected {op!r}, found {tok.value or 'end of input'!r}", tok.pos)
        return self.advance()

    def expect_end(self) -> None:
        tok = self.peek()
        if tok.kind != "END":
            raise ParseError(f"unexpected trailing input {tok.value!r}", tok.pos)

    # grammar rules

    def comparison(self) -> Expr:
        left = self.arith()
        tok = self.peek()
        if tok.kind == "OP" and tok.value in COMPARE_OPS:
            self.advance()
            right = self.arith()
            nxt = self.peek()
            if nxt.kind == "OP" and nxt.value in COMPARE_OPS:
                raise ParseError("chained comparisons are not supported", nxt.pos)
            return Compare(tok.value, left, right)
        return left

    def arith(self) -> Expr:
        node = self.term()
        while True:
            tok = self.match_op("+", "-")
            if tok is None:
                return node
            node = BinOp(tok.value, node, self.term())

    def term(self) -> Expr:
        node = self.factor()
        while True:
            tok = self.match_op("*", "/")
            if tok is None:
                return node
            node = BinOp(tok.value, node, self.factor())

    def factor(self) -> Expr:
        if self.match_op("-"):
            return UnaryNeg(self.factor())
        return self.postfix()

    def postfix(self) -> Expr:
        node = self.atom()
        while True:
            if self.match_op("["):
                keys = [self.arith()]
                while self.match_op(","):
                    keys.append(self.arith())
                self.expect_op("]")
                node = Subscript(node, tuple(keys))
            elif self.match_op("."):
                tok = self.peek()
                if tok.kind != "NAME" or tok.value not in TABLE_METHODS:
                    raise ParseError(
                        f"only .keys()/.values()/.items() may follow an expression, found {tok.value!r}",
                        tok.pos,
                    )
                self.advance()
                self.expect_op("(")
                self.expect_op(")")
                node = MethodCall(tok.value, node)
            else:
                return node

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return NumberLit(float(tok.value))
        if tok.kind == "STRING":
            self.advance()
            return StringLit(tok.value)
        if tok.kind == "OP" and tok.value == "(":
            self.advance()
            return self.group()
        if tok.kind == "NAME":
            return self.name_atom()
        raise ParseError(f"unexpected token {tok.value or 'end of input'!r}", tok.pos)

    def name_atom(self) -> Expr:
        tok = self.advance()
        word = tok.value
        if word == "self":
            self.expect_op(".")
            attr = self.peek()
            if attr.kind != "NAME":
                raise ParseError("expected a name after 'self.'", attr.pos)
            self.advance()
            return SelfAttr(attr.value)
        if word in _RESERVED:
            raise ParseError(f"{word!r} cannot be used here", tok.pos)
        if self.peek().kind == "OP" and self.peek().value == "(":
            if word not in BUILTIN_FUNCS:
                raise ParseError(f"unknown function {word!r}", tok.pos)
            self.advance()
            return self.call(word)
        return Name(word)

    def call(self, func: str) -> Expr:
        if self.match_op(")"):
            return Call(func, ())
        first = self.comparison()
        if self.peek().kind == "NAME" and self.peek().value == "for":
            gen = self.generator(first)
            self.expect_op(")")
            return Call(func, (gen,))
        args = [first]
        while self.match_op(","):
            args.append(self.comparison())
        self.expect_op(")")
        return Call(func, tuple(args))

    def group(self) -> Expr:
        inner = self.comparison()
        if self.peek().kind == "NAME" and self.peek().value == "for":
            gen = self.generator(inner)
            self.expect_op(")")
            return gen
        self.expect_op(")")
        return inner

    def generator(self, body: Expr) -> GeneratorExpr:
        clauses: list[ForClause] = []
        while self.match_name("for"):
            clauses.append(self.for_clause())
        condition: Expr | None = None
        if self.match_name("if"):
            condition = self.comparison()
        return GeneratorExpr(body, tuple(clauses), condition)

    def for_clause(self) -> ForClause:
        parenthesized = self.match_op("(") is not None
        targets = [self.target_name()]
        while self.match_op(","):
            targets.append(self.target_name())
        if parenthesized:
            self.expect_op(")")
        tok = self.peek()
        if tok.kind != "NAME" or tok.value != "in":
            raise ParseError("expected 'in' in for-clause", tok.pos)
        self.advance()
        return ForClause(tuple(targets), self.arith())

    def target_name(self) -> str:
        tok = self.peek()
        if tok.kind != "NAME" or tok.value in _RESERVED:
            raise ParseError("expected a loop variable name", tok.pos)
        self.advance()
        return tok.value
