"""Compile a vector field into straight-line value/jet kernels.

Each field is turned into generated source for two functions of scalar
``x, y, z``:

* ``value(x, y, z) -> (v0, v1, v2, raw_norm)``
* ``jet(x, y, z) -> (v0, v1, v2, J00, J01, ..., J22, raw_norm)``

using forward-mode dual-number propagation (one value and three partials per
subexpression; structurally zero partials are dropped).  When the field is
normalized the quotient rule is applied in the generated code.

The same source is bound three ways: with ``math`` (scalar Python), with
``numpy`` (vectorized over point arrays) and, when enabled, compiled with
numba together with a batch loop.  Undefined points come out as non-finite
numbers (or ``raw_norm == 0`` for vanishing fields) on every path.
"""

from __future__ import annotations

import math

import numpy as np

from .. import _accel
from .dual import CONSTANT_VALUES
from .nodes import BinOp, Call, Const, Expression, Neg, Num, Var, variables_in

_SEED = {"x": ("1.0", None, None), "y": (None, "1.0", None), "z": (None, None, "1.0")}


class _Emitter:
    def __init__(self, with_partials: bool):
        self.lines: list[str] = []
        self.count = 0
        self.with_partials = with_partials

    def emit(self, rhs: str) -> str:
        name = f"t{self.count}"
        self.count += 1
        self.lines.append(f"    {name} = {rhs}")
        return name

    # partial-derivative helpers; ``None`` is a structural zero
    def add(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        return self.emit(f"{a} + {b}")

    def sub(self, a, b):
        if b is None:
            return a
        if a is None:
            return self.emit(f"-{b}")
        return self.emit(f"{a} - {b}")

    def scale(self, k: str, a):
        if a is None:
            return None
        if a == "1.0":
            return k
        return self.emit(f"{k} * {a}")

    def node(self, n: Expression):
        """Emit code for ``n``; return (value_name, [partial names or None])."""
        P = self.with_partials
        if isinstance(n, Num):
            return repr(float(n.value)), [None] * 3
        if isinstance(n, Const):
            return repr(CONSTANT_VALUES[n.name]), [None] * 3
        if isinstance(n, Var):
            return n.name, list(_SEED[n.name]) if P else [None] * 3
        if isinstance(n, Neg):
            v, d = self.node(n.operand)
            return self.emit(f"-{v}"), [None if p is None else self.emit(f"-{p}") for p in d]
        if isinstance(n, BinOp):
            return self._binop(n)
        if isinstance(n, Call):
            return self._call(n)
        raise TypeError(f"not an expression node: {n!r}")

    def _binop(self, n: BinOp):
        a, da = self.node(n.left)
        b, db = self.node(n.right)
        P = self.with_partials
        if n.op == "+":
            return self.emit(f"{a} + {b}"), [self.add(p, q) for p, q in zip(da, db)] if P else da
        if n.op == "-":
            return self.emit(f"{a} - {b}"), [self.sub(p, q) for p, q in zip(da, db)] if P else da
        if n.op == "*":
            v = self.emit(f"{a} * {b}")
            if not P:
                return v, da
            return v, [self.add(self.scale(b, p), self.scale(a, q)) for p, q in zip(da, db)]
        if n.op == "/":
            v = self.emit(f"{a} / {b}")
            if not P:
                return v, da
            inv = self.emit(f"1.0 / {b}")
            out = []
            for p, q in zip(da, db):
                # (p - v*q) / b
                out.append(self.scale(inv, self.sub(p, self.scale(v, q))))
            return v, out
        # power
        if not variables_in(n.right):
            v = self.emit(f"_pow({a}, {b})")
            if not P or all(p is None for p in da):
                return v, [None] * 3
            k = self.emit(f"{b} * _pow({a}, {b} - 1.0)")
            return v, [self.scale(k, p) for p in da]
        v = self.emit(f"_pow(_pos({a}), {b})")
        if not P:
            return v, da
        la = self.emit(f"_log(_pos({a}))")
        ka = self.emit(f"{v} * {b} / {a}")
        kb = self.emit(f"{v} * {la}")
        return v, [self.add(self.scale(ka, p), self.scale(kb, q)) for p, q in zip(da, db)]

    def _call(self, n: Call):
        f = n.func
        P = self.with_partials
        if f == "atan2":
            (a, da), (b, db) = self.node(n.args[0]), self.node(n.args[1])
            v = self.emit(f"_atan2({a}, {b})")
            if not P:
                return v, da
            r2 = self.emit(f"{a} * {a} + {b} * {b}")
            ka = self.emit(f"{b} / {r2}")
            kb = self.emit(f"-{a} / {r2}")
            return v, [self.add(self.scale(ka, p), self.scale(kb, q)) for p, q in zip(da, db)]
        a, da = self.node(n.args[0])
        if f == "sin":
            v = self.emit(f"_sin({a})")
            k = "_cos({a})"
        elif f == "cos":
            v = self.emit(f"_cos({a})")
            k = "-_sin({a})"
        elif f == "tan":
            v = self.emit(f"_tan({a})")
            k = f"1.0 + {v} * {v}"
        elif f == "atan":
            v = self.emit(f"_atan({a})")
            k = "1.0 / (1.0 + {a} * {a})"
        elif f == "exp":
            v = self.emit(f"_exp({a})")
            k = v
        elif f == "log":
            v = self.emit(f"_log(_pos({a}))")
            k = "1.0 / {a}"
        elif f == "sqrt":
            v = self.emit(f"_sqrt(_nonneg({a}))")
            k = f"0.5 / {v}"
        elif f == "abs":
            v = self.emit(f"_abs({a})")
            k = "_sign({a})"
        else:  # pragma: no cover - parser rejects unknown functions
            raise ValueError(f)
        if not P or all(p is None for p in da):
            return v, [None] * 3
        kname = self.emit(k.format(a=a))
        return v, [self.scale(kname, p) for p in da]


def _zero(p):
    return "0.0" if p is None else p


def generate_source(components: tuple[Expression, Expression, Expression], normalize: bool, jet: bool) -> str:
    """Source of ``value`` (``jet=False``) or ``jet`` (``jet=True``) for a three-component field."""
    em = _Emitter(with_partials=jet)
    vals, parts = [], []
    for comp in components:
        v, d = em.node(comp)
        vals.append(v)
        parts.append([_zero(p) for p in d])
    lines = em.lines
    v0, v1, v2 = vals
    if normalize:
        lines.append(f"    n2 = {v0} * {v0} + {v1} * {v1} + {v2} * {v2}")
        lines.append("    rn = _sqrt(n2)")
        lines.append("    inv = 1.0 / _pos(rn)")
        lines.append(f"    u0 = {v0} * inv")
        lines.append(f"    u1 = {v1} * inv")
        lines.append(f"    u2 = {v2} * inv")
        outs = ["u0", "u1", "u2"]
        if jet:
            for j in range(3):
                lines.append(
                    f"    s{j} = u0 * {parts[0][j]} + u1 * {parts[1][j]} + u2 * {parts[2][j]}"
                )
            for i in range(3):
                for j in range(3):
                    lines.append(f"    J{i}{j} = ({parts[i][j]} - u{i} * s{j}) * inv")
                    outs.append(f"J{i}{j}")
        outs.append("rn")
    else:
        lines.append(f"    rn = _sqrt({v0} * {v0} + {v1} * {v1} + {v2} * {v2})")
        outs = [f"({v})" for v in vals]
        if jet:
            outs += [parts[i][j] for i in range(3) for j in range(3)]
        outs.append("rn")
    name = "jet" if jet else "value"
    body = "\n".join(lines)
    return f"def {name}(x, y, z):\n{body}\n    return ({', '.join(outs)},)\n"


def _m_pos(a):
    return a if a > 0.0 else math.nan


def _m_nonneg(a):
    return a if a >= 0.0 else math.nan


def _m_sign(a):
    return float((a > 0.0) - (a < 0.0))


def _m_pow(a, b):
    try:
        return math.pow(a, b)
    except (ValueError, ZeroDivisionError):
        return math.nan
    except OverflowError:
        return math.inf


def _m_exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


_MATH_GLOBALS = {
    "_sin": math.sin,
    "_cos": math.cos,
    "_tan": math.tan,
    "_atan": math.atan,
    "_atan2": math.atan2,
    "_exp": _m_exp,
    "_log": math.log,
    "_sqrt": math.sqrt,
    "_abs": abs,
    "_sign": _m_sign,
    "_pos": _m_pos,
    "_nonneg": _m_nonneg,
    "_pow": _m_pow,
}

_NUMPY_GLOBALS = {
    "_sin": np.sin,
    "_cos": np.cos,
    "_tan": np.tan,
    "_atan": np.arctan,
    "_atan2": np.arctan2,
    "_exp": np.exp,
    "_log": np.log,
    "_sqrt": np.sqrt,
    "_abs": np.abs,
    "_sign": np.sign,
    "_pos": lambda a: np.where(a > 0.0, a, np.nan),
    "_nonneg": lambda a: np.where(a >= 0.0, a, np.nan),
    "_pow": np.power,
}


def _numba_globals() -> dict:
    nj = _accel.njit

    @nj(inline="always")
    def _pos(a):
        return a if a > 0.0 else np.nan

    @nj(inline="always")
    def _nonneg(a):
        return a if a >= 0.0 else np.nan

    @nj(inline="always")
    def _sign(a):
        return float((a > 0.0) - (a < 0.0))

    @nj(inline="always")
    def _pow(a, b):
        # math.pow maps domain errors to nan / inf under the numpy error model
        return a**b if (a > 0.0 or b == math.floor(b)) else np.nan

    return {
        "_sin": math.sin,
        "_cos": math.cos,
        "_tan": math.tan,
        "_atan": math.atan,
        "_atan2": math.atan2,
        "_exp": math.exp,
        "_log": math.log,
        "_sqrt": math.sqrt,
        "_abs": abs,
        "_sign": _sign,
        "_pos": _pos,
        "_nonneg": _nonneg,
        "_pow": _pow,
        "np": np,
        "math": math,
    }


_NUMBA_HELPERS: dict | None = None


def _bind(source: str, name: str, env: dict):
    ns = dict(env)
    exec(compile(source, f"<linefib:{name}>", "exec"), ns)
    return ns[name]


def _batch_source(name: str, n_out: int) -> str:
    assigns = "\n".join(f"        out[k, {i}] = r[{i}]" for i in range(n_out))
    return (
        f"def batch(P, out):\n"
        f"    for k in range(P.shape[0]):\n"
        f"        r = {name}(P[k, 0], P[k, 1], P[k, 2])\n"
        f"{assigns}\n"
    )


class CompiledField:
    """Value and jet kernels for one field, bound to the active backend."""

    N_VALUE = 4
    N_JET = 13

    def __init__(self, components, normalize: bool, use_numba: bool | None = None):
        self.value_source = generate_source(components, normalize, jet=False)
        self.jet_source = generate_source(components, normalize, jet=True)
        self.use_numba = _accel.USE_NUMBA if use_numba is None else (use_numba and _accel.HAVE_NUMBA)
        self.value_py = _bind(self.value_source, "value", _MATH_GLOBALS)
        self.jet_py = _bind(self.jet_source, "jet", _MATH_GLOBALS)
        self.value_np = _bind(self.value_source, "value", _NUMPY_GLOBALS)
        self.jet_np = _bind(self.jet_source, "jet", _NUMPY_GLOBALS)
        self._nb = None

    def _numba_kernels(self):
        global _NUMBA_HELPERS
        if self._nb is None:
            if _NUMBA_HELPERS is None:
                _NUMBA_HELPERS = _numba_globals()
            nj = _accel.njit
            value = nj(_bind(self.value_source, "value", _NUMBA_HELPERS))
            jet = nj(_bind(self.jet_source, "jet", _NUMBA_HELPERS))
            vbatch = nj(_bind(_batch_source("value", self.N_VALUE), "batch", {"value": value}))
            jbatch = nj(_bind(_batch_source("jet", self.N_JET), "batch", {"jet": jet}))
            self._nb = (value, jet, vbatch, jbatch)
        return self._nb

    def value(self, x: float, y: float, z: float) -> tuple:
        if self.use_numba:
            return self._numba_kernels()[0](x, y, z)
        try:
            return self.value_py(x, y, z)
        except (ValueError, ZeroDivisionError, OverflowError):
            return (math.nan,) * self.N_VALUE

    def jet(self, x: float, y: float, z: float) -> tuple:
        if self.use_numba:
            return self._numba_kernels()[1](x, y, z)
        try:
            return self.jet_py(x, y, z)
        except (ValueError, ZeroDivisionError, OverflowError):
            return (math.nan,) * self.N_JET

    def _batch(self, points: np.ndarray, jet: bool) -> np.ndarray:
        P = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
        n_out = self.N_JET if jet else self.N_VALUE
        if self.use_numba:
            out = np.empty((P.shape[0], n_out))
            self._numba_kernels()[3 if jet else 2](P, out)
            return out
        fn = self.jet_np if jet else self.value_np
        with np.errstate(all="ignore"):
            cols = fn(P[:, 0], P[:, 1], P[:, 2])
        out = np.empty((P.shape[0], n_out))
        for i, c in enumerate(cols):
            out[:, i] = c
        return out

    def value_batch(self, points: np.ndarray) -> np.ndarray:
        return self._batch(points, jet=False)

    def jet_batch(self, points: np.ndarray) -> np.ndarray:
        return self._batch(points, jet=True)
