"""Forward-mode dual numbers in three variables and tree-walking evaluation.

This is the reference evaluator.  The compiled kernels in ``linefib.expr.compile``
apply the same rules to generated straight-line code; the two are
cross-checked in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .nodes import BinOp, Call, Const, Expression, Neg, Num, Var, variables_in


class EvaluationError(ArithmeticError):
    """An expression is undefined (or not differentiable) at the requested point."""


@dataclass(frozen=True)
class DualNumber3:
    value: float
    partials: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @staticmethod
    def lift(other) -> "DualNumber3":
        if isinstance(other, DualNumber3):
            return other
        return DualNumber3(float(other))

    def _scaled(self, value: float, factor: float) -> "DualNumber3":
        a, b, c = self.partials
        return DualNumber3(value, (factor * a, factor * b, factor * c))

    def __add__(self, other) -> "DualNumber3":
        o = DualNumber3.lift(other)
        return DualNumber3(self.value + o.value, tuple(p + q for p, q in zip(self.partials, o.partials)))

    __radd__ = __add__

    def __neg__(self) -> "DualNumber3":
        return DualNumber3(-self.value, tuple(-p for p in self.partials))

    def __sub__(self, other) -> "DualNumber3":
        o = DualNumber3.lift(other)
        return DualNumber3(self.value - o.value, tuple(p - q for p, q in zip(self.partials, o.partials)))

    def __rsub__(self, other) -> "DualNumber3":
        return DualNumber3.lift(other) - self

    def __mul__(self, other) -> "DualNumber3":
        o = DualNumber3.lift(other)
        return DualNumber3(
            self.value * o.value,
            tuple(self.value * q + o.value * p for p, q in zip(self.partials, o.partials)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DualNumber3":
        o = DualNumber3.lift(other)
        if o.value == 0.0:
            raise EvaluationError("division by zero")
        b2 = o.value * o.value
        return DualNumber3(
            self.value / o.value,
            tuple((p * o.value - self.value * q) / b2 for p, q in zip(self.partials, o.partials)),
        )

    def __rtruediv__(self, other) -> "DualNumber3":
        return DualNumber3.lift(other) / self

    def __pow__(self, other) -> "DualNumber3":
        o = DualNumber3.lift(other)
        if self.value <= 0.0:
            raise EvaluationError("variable exponent needs a positive base")
        value = _real_pow(self.value, o.value)
        la = math.log(self.value)
        return DualNumber3(
            value,
            tuple(value * (q * la + o.value * p / self.value) for p, q in zip(self.partials, o.partials)),
        )


def dual_pow_const(a: DualNumber3, c: float) -> DualNumber3:
    """``a^c`` for an exponent that does not depend on x, y, z."""
    value = _real_pow(a.value, c)
    return a._scaled(value, c * _real_pow(a.value, c - 1.0) if c != 0.0 else 0.0)


def _real_pow(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvaluationError(f"{a!r}^{b!r} is undefined") from exc


def _check(ok: bool, what: str) -> None:
    if not ok:
        raise EvaluationError(what)


def dual_sin(a: DualNumber3) -> DualNumber3:
    return a._scaled(math.sin(a.value), math.cos(a.value))


def dual_cos(a: DualNumber3) -> DualNumber3:
    return a._scaled(math.cos(a.value), -math.sin(a.value))


def dual_tan(a: DualNumber3) -> DualNumber3:
    t = math.tan(a.value)
    return a._scaled(t, 1.0 + t * t)


def dual_atan(a: DualNumber3) -> DualNumber3:
    return a._scaled(math.atan(a.value), 1.0 / (1.0 + a.value * a.value))


def dual_atan2(a: DualNumber3, b: DualNumber3) -> DualNumber3:
    r2 = a.value * a.value + b.value * b.value
    _check(r2 > 0.0, "atan2(0, 0) is not differentiable")
    return DualNumber3(
        math.atan2(a.value, b.value),
        tuple((b.value * p - a.value * q) / r2 for p, q in zip(a.partials, b.partials)),
    )


def dual_exp(a: DualNumber3) -> DualNumber3:
    try:
        v = math.exp(a.value)
    except OverflowError as exc:
        raise EvaluationError("exp overflow") from exc
    return a._scaled(v, v)


def dual_log(a: DualNumber3) -> DualNumber3:
    _check(a.value > 0.0, "log of a nonpositive number")
    return a._scaled(math.log(a.value), 1.0 / a.value)


def dual_sqrt(a: DualNumber3) -> DualNumber3:
    _check(a.value > 0.0, "sqrt is not differentiable at or below 0")
    s = math.sqrt(a.value)
    return a._scaled(s, 0.5 / s)


def dual_abs(a: DualNumber3) -> DualNumber3:
    sign = (a.value > 0.0) - (a.value < 0.0)
    return a._scaled(abs(a.value), float(sign))


DUAL_FUNCTIONS = {
    "sin": dual_sin,
    "cos": dual_cos,
    "tan": dual_tan,
    "atan": dual_atan,
    "atan2": dual_atan2,
    "exp": dual_exp,
    "log": dual_log,
    "sqrt": dual_sqrt,
    "abs": dual_abs,
}

CONSTANT_VALUES = {"pi": math.pi, "e": math.e}


def evaluate_dual(node: Expression, x: DualNumber3, y: DualNumber3, z: DualNumber3) -> DualNumber3:
    """Evaluate ``node`` on dual-number arguments (tree walk)."""
    env = {"x": x, "y": y, "z": z}

    def walk(n: Expression) -> DualNumber3:
        if isinstance(n, Num):
            return DualNumber3(n.value)
        if isinstance(n, Const):
            return DualNumber3(CONSTANT_VALUES[n.name])
        if isinstance(n, Var):
            return env[n.name]
        if isinstance(n, Neg):
            return -walk(n.operand)
        if isinstance(n, BinOp):
            a, b = walk(n.left), walk(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            if n.op == "/":
                return a / b
            if not variables_in(n.right):
                return dual_pow_const(a, b.value)
            return a**b
        if isinstance(n, Call):
            return DUAL_FUNCTIONS[n.func](*(walk(a) for a in n.args))
        raise TypeError(f"not an expression node: {n!r}")

    try:
        out = walk(node)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvaluationError(str(exc)) from exc
    if not all(math.isfinite(v) for v in (out.value, *out.partials)):
        raise EvaluationError("non-finite result")
    return out


def seed(p) -> tuple[DualNumber3, DualNumber3, DualNumber3]:
    """Independent variables at point ``p`` with unit partials."""
    return (
        DualNumber3(float(p[0]), (1.0, 0.0, 0.0)),
        DualNumber3(float(p[1]), (0.0, 1.0, 0.0)),
        DualNumber3(float(p[2]), (0.0, 0.0, 1.0)),
    )


def evaluate_scalar(node: Expression, p) -> float:
    """Plain value of ``node`` at ``p`` (tree walk, no derivatives)."""
    env = {"x": float(p[0]), "y": float(p[1]), "z": float(p[2])}
    funcs = {
        "sin": math.sin,
        "cos": math.cos,
        "tan": math.tan,
        "atan": math.atan,
        "atan2": math.atan2,
        "exp": math.exp,
        "log": math.log,
        "sqrt": math.sqrt,
        "abs": abs,
    }

    def walk(n: Expression) -> float:
        if isinstance(n, Num):
            return n.value
        if isinstance(n, Const):
            return CONSTANT_VALUES[n.name]
        if isinstance(n, Var):
            return env[n.name]
        if isinstance(n, Neg):
            return -walk(n.operand)
        if isinstance(n, BinOp):
            a, b = walk(n.left), walk(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            if n.op == "/":
                return a / b
            return math.pow(a, b)
        return funcs[n.func](*(walk(a) for a in n.args))

    try:
        out = walk(node)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvaluationError(str(exc)) from exc
    if not math.isfinite(out):
        raise EvaluationError("non-finite result")
    return out
