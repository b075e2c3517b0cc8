"""Tokenizer for the expression mini-language.

Expressions arrive from YAML plain scalars, so line-continuation
backslashes may survive in the text; the lexer discards them like
whitespace.
"""

from __future__ import annotations

from dataclasses import dataclass


class ParseError(ValueError):
    """Raised for text outside the expression grammar."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER | STRING | NAME | OP | END
    value: str
    pos: int


_TWO_CHAR_OPS = ("<=", ">=", "==", "!=")
_ONE_CHAR_OPS = set("+-*/()[],.<>")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace() or ch == "\\":
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            tokens.append(_number(text, i))
            i += len(tokens[-1].value)
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("NAME", text[i:j], i))
            i = j
            continue
        if ch in ("'", '"'):
            j = text.find(ch, i + 1)
            if j < 0:
                raise ParseError("unterminated string literal", i)
            tokens.append(Token("STRING", text[i + 1 : j], i))
            i = j + 1
            continue
        if text[i : i + 2] in _TWO_CHAR_OPS:
            tokens.append(Token("OP", text[i : i + 2], i))
            i += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(Token("OP", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(Token("END", "", n))
    return tokens


def _number(text: str, start: int) -> Token:
    i, n = start, len(text)
    seen_dot = False
    while i < n:
        ch = text[i]
        if ch.isdigit():
            i += 1
        elif ch == "." and not seen_dot and i + 1 < n and text[i + 1].isdigit():
            # a dot not followed by a digit starts a method call, not a decimal
            seen_dot = True
            i += 1
        else:
            break
    return Token("NUMBER", text[start:i], start)
