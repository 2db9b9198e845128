"""Expression tree nodes and the canonical printer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

VARIABLES = ("x", "y", "z")
CONSTANTS = ("pi", "e")
FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "atan": 1,
    "atan2": 2,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "abs": 1,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str  # "pi" or "e"


@dataclass(frozen=True)
class Var:
    name: str  # "x", "y" or "z"


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expression", ...]


Expression = Union[Num, Const, Var, Neg, BinOp, Call]

# Binding strength used by the printer; higher binds tighter.
_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node: Expression) -> int:
    if isinstance(node, BinOp):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[node.op]
    if isinstance(node, Neg):
        return _PREC_NEG
    if isinstance(node, Num) and node.value < 0:
        return _PREC_NEG
    return _PREC_ATOM


def _wrap(node: Expression, min_prec: int) -> str:
    text = to_text(node)
    return text if _prec(node) >= min_prec else f"({text})"


def _num_text(value: float) -> str:
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError(f"cannot print non-finite literal {value!r}")
    if value == int(value) and abs(value) < 1e16:
        return str(int(value)) if value >= 0 else f"-{int(-value)}"
    return repr(value)


def to_text(node: Expression) -> str:
    """Print ``node`` with the minimum parentheses needed to re-parse it to the same tree."""
    if isinstance(node, Num):
        if node.value < 0:
            return "-" + _num_text(-node.value)
        return _num_text(node.value)
    if isinstance(node, (Const, Var)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _PREC_POW)
    if isinstance(node, BinOp):
        if node.op in "+-":
            return f"{_wrap(node.left, _PREC_ADD)} {node.op} {_wrap(node.right, _PREC_MUL)}"
        if node.op in "*/":
            return f"{_wrap(node.left, _PREC_MUL)} {node.op} {_wrap(node.right, _PREC_NEG)}"
        return f"{_wrap(node.left, _PREC_ATOM)}^{_wrap(node.right, _PREC_NEG)}"
    raise TypeError(f"not an expression node: {node!r}")


def variables_in(node: Expression) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return variables_in(node.operand)
    if isinstance(node, BinOp):
        return variables_in(node.left) | variables_in(node.right)
    if isinstance(node, Call):
        out: set[str] = set()
        for a in node.args:
            out |= variables_in(a)
        return out
    return set()


def substitute(node: Expression, mapping: dict[str, Expression]) -> Expression:
    """Replace variables by expressions (simultaneously)."""
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, mapping))
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, mapping), substitute(node.right, mapping))
    if isinstance(node, Call):
        return Call(node.func, tuple(substitute(a, mapping) for a in node.args))
    return node


def constant(value: float) -> Expression:
    """Literal node for ``value``; negatives become ``Neg(Num(|value|))`` so printing round-trips."""
    value = float(value)
    return Neg(Num(-value)) if value < 0 else Num(value)


_ZERO, _ONE = Num(0.0), Num(1.0)


def _add(a: Expression, b: Expression) -> Expression:
    if a == _ZERO:
        return b
    if b == _ZERO:
        return a
    return BinOp("+", a, b)


def _sub(a: Expression, b: Expression) -> Expression:
    if b == _ZERO:
        return a
    if a == _ZERO:
        return Neg(b)
    return BinOp("-", a, b)


def _mul(a: Expression, b: Expression) -> Expression:
    if a == _ZERO or b == _ZERO:
        return _ZERO
    if a == _ONE:
        return b
    if b == _ONE:
        return a
    return BinOp("*", a, b)


def _div(a: Expression, b: Expression) -> Expression:
    if a == _ZERO:
        return _ZERO
    return BinOp("/", a, b)


def derivative(node: Expression, var: str) -> Expression:
    """Symbolic partial derivative of ``node`` with respect to ``var``.

    Only zero/one factors are folded; the result is otherwise unsimplified.
    Used where a second derivative of a one-variable profile is required.
    """
    d = lambda n: derivative(n, var)  # noqa: E731
    if isinstance(node, (Num, Const)):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.name == var else _ZERO
    if isinstance(node, Neg):
        inner = d(node.operand)
        return _ZERO if inner == _ZERO else Neg(inner)
    if isinstance(node, BinOp):
        a, b = node.left, node.right
        da, db = d(a), d(b)
        if node.op == "+":
            return _add(da, db)
        if node.op == "-":
            return _sub(da, db)
        if node.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if node.op == "/":
            return _div(_sub(_mul(da, b), _mul(a, db)), BinOp("^", b, Num(2.0)))
        if not variables_in(b):
            return _mul(_mul(b, BinOp("^", a, BinOp("-", b, _ONE))), da)
        return _mul(
            node,
            _add(_mul(db, Call("log", (a,))), _div(_mul(b, da), a)),
        )
    if isinstance(node, Call):
        a = node.args[0]
        da = d(a)
        f = node.func
        if f == "atan2":
            b = node.args[1]
            db = d(b)
            num = _sub(_mul(b, da), _mul(a, db))
            return _div(num, BinOp("+", BinOp("^", a, Num(2.0)), BinOp("^", b, Num(2.0))))
        if da == _ZERO:
            return _ZERO
        outer = {
            "sin": lambda: Call("cos", (a,)),
            "cos": lambda: Neg(Call("sin", (a,))),
            "tan": lambda: BinOp("+", _ONE, BinOp("^", Call("tan", (a,)), Num(2.0))),
            "atan": lambda: BinOp("/", _ONE, BinOp("+", _ONE, BinOp("^", a, Num(2.0)))),
            "exp": lambda: Call("exp", (a,)),
            "log": lambda: BinOp("/", _ONE, a),
            "sqrt": lambda: BinOp("/", _ONE, BinOp("*", Num(2.0), Call("sqrt", (a,)))),
            "abs": lambda: BinOp("/", a, Call("abs", (a,))),
        }[f]()
        return _mul(outer, da)
    raise TypeError(f"not an expression node: {node!r}")
