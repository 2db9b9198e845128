"""Recursive-descent parser for the field expression language.

Grammar (``^`` binds tightest and is right-associative, then unary minus,
then ``* /``, then ``+ -``)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := ("-")? power
    power  := atom ("^" factor)?
    atom   := number | "pi" | "e" | "x" | "y" | "z"
            | func "(" expr ("," expr)? ")" | "(" expr ")"
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import CONSTANTS, FUNCTIONS, VARIABLES, BinOp, Call, Const, Expression, Neg, Num, Var


class ParseError(ValueError):
    """Base class for rejected expression text.  ``offset`` is a byte offset into the UTF-8 input."""

    def __init__(self, message: str, text: str, char_offset: int):
        self.text = text
        self.offset = len(text[:char_offset].encode("utf-8"))
        super().__init__(f"{message} at byte {self.offset}")


class ExpressionSyntaxError(ParseError):
    pass


class UnknownIdentifierError(ParseError):
    pass


class ArityError(ParseError):
    pass


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _fail(self, what: str) -> ExpressionSyntaxError:
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return ExpressionSyntaxError(f"expected {what}, found {found}", self.text, tok.pos)

    def _accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def _expect(self, op: str) -> None:
        if not self._accept(op):
            raise self._fail(repr(op))

    def parse(self) -> Expression:
        node = self.expr()
        if self.tok.kind != "end":
            raise self._fail("operator or end of input")
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expression:
        if self._accept("-"):
            return Neg(self.power())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self._accept("^"):
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Expression:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name in VARIABLES:
                return Var(name)
            if name in CONSTANTS:
                return Const(name)
            if name in FUNCTIONS:
                return self._call(name, tok)
            raise UnknownIdentifierError(f"unknown identifier {name!r}", self.text, tok.pos)
        if self._accept("("):
            node = self.expr()
            self._expect(")")
            return node
        raise self._fail("number, variable, function or '('")

    def _call(self, name: str, tok: _Token) -> Expression:
        self._expect("(")
        args = [self.expr()]
        while self._accept(","):
            args.append(self.expr())
        self._expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", self.text, tok.pos
            )
        return Call(name, tuple(args))


def parse_expression(text: str) -> Expression:
    """Parse ``text`` into an expression tree.

    >>> parse_expression("cos(z)")
    Call(func='cos', args=(Var(name='z'),))
    """
    return _Parser(text).parse()


def split_components(text: str) -> list[str]:
    """Split ``"a,b,c"`` on top-level commas (commas inside parentheses belong to calls)."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts]
