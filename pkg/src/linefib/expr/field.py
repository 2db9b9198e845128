"""Vector fields on R^3 given by three expressions."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .compile import CompiledField
from .dual import EvaluationError, evaluate_dual, seed
from .nodes import BinOp, Expression, Var, constant, substitute, to_text
from .parser import ExpressionSyntaxError, parse_expression, split_components


class ZeroVectorError(EvaluationError):
    """The field vanishes where a direction (or normalization) is required."""


# per-point status codes used by the batch evaluators
OK, DOMAIN_ERROR, ZERO_VECTOR = 0, 1, 2


@dataclass(frozen=True)
class VectorFieldSpec:
    v1: Expression
    v2: Expression
    v3: Expression
    normalize: bool = False
    name: str | None = dc_field(default=None, compare=False)

    @classmethod
    def from_strings(cls, v1: str, v2: str, v3: str, normalize: bool = False, name: str | None = None):
        return cls(parse_expression(v1), parse_expression(v2), parse_expression(v3), normalize, name)

    @classmethod
    def parse(cls, text: str, normalize: bool = False, name: str | None = None) -> "VectorFieldSpec":
        """Parse the CLI form ``"e1,e2,e3"``."""
        parts = split_components(text)
        if len(parts) != 3:
            raise ExpressionSyntaxError(f"a field needs 3 comma-separated components, got {len(parts)}", text, 0)
        return cls.from_strings(*parts, normalize=normalize, name=name)

    @property
    def components(self) -> tuple[Expression, Expression, Expression]:
        return (self.v1, self.v2, self.v3)

    def texts(self) -> list[str]:
        return [to_text(c) for c in self.components]

    @cached_property
    def kernels(self) -> CompiledField:
        return CompiledField(self.components, self.normalize)

    def rotated(self, R) -> "VectorFieldSpec":
        """The field ``p -> R V(R^T p)`` (the image of this field under the rotation ``R``)."""
        R = np.asarray(R, dtype=float)
        xyz = [Var("x"), Var("y"), Var("z")]

        def lin(coeffs) -> Expression:
            terms = [BinOp("*", constant(c), e) for c, e in zip(coeffs, xyz)]
            return BinOp("+", BinOp("+", terms[0], terms[1]), terms[2])

        # (R^T p)_j = sum_i R[i, j] p_i
        mapping = {name: lin(R[:, j]) for j, name in enumerate("xyz")}
        pulled = [substitute(c, mapping) for c in self.components]
        comps = []
        for i in range(3):
            terms = [BinOp("*", constant(R[i, j]), pulled[j]) for j in range(3)]
            comps.append(BinOp("+", BinOp("+", terms[0], terms[1]), terms[2]))
        label = f"{self.name}-rotated" if self.name else None
        return VectorFieldSpec(*comps, normalize=self.normalize, name=label)


@dataclass(frozen=True)
class Jet:
    value: np.ndarray  # V(p), shape (3,)
    jacobian: np.ndarray  # jacobian[i, j] = dV_i / dx_j, shape (3, 3)


def _check(field: VectorFieldSpec, raw_norm: float, data: np.ndarray, p) -> None:
    where = tuple(float(c) for c in p)
    if field.normalize and raw_norm == 0.0:
        raise ZeroVectorError(f"field vanishes at {where}, cannot normalize")
    if not np.isfinite(data).all():
        raise EvaluationError(f"field undefined at {where}")


def evaluate(field: VectorFieldSpec, p) -> np.ndarray:
    """V(p); unit length when the spec asks for normalization."""
    x, y, z = (float(c) for c in p)
    r = field.kernels.value(x, y, z)
    v = np.array(r[:3])
    _check(field, r[3], v, p)
    return v


def evaluate_jet(field: VectorFieldSpec, p) -> Jet:
    """Value and Jacobian of V at p by forward-mode propagation."""
    x, y, z = (float(c) for c in p)
    r = field.kernels.jet(x, y, z)
    arr = np.array(r[:12])
    _check(field, r[12], arr, p)
    return Jet(arr[:3], arr[3:12].reshape(3, 3))


def evaluate_jet_reference(field: VectorFieldSpec, p) -> Jet:
    """Same as :func:`evaluate_jet` via the tree-walking ``DualNumber3`` evaluator."""
    xs = seed(p)
    comps = [evaluate_dual(c, *xs) for c in field.components]
    v = np.array([c.value for c in comps])
    J = np.array([c.partials for c in comps])
    if field.normalize:
        n = float(np.sqrt(v @ v))
        if n == 0.0:
            raise ZeroVectorError(f"field vanishes at {tuple(p)}")
        u = v / n
        J = (J - np.outer(u, u @ J)) / n
        v = u
    return Jet(v, J)


@dataclass(frozen=True)
class JetBatch:
    values: np.ndarray  # (N, 3)
    jacobians: np.ndarray  # (N, 3, 3)
    status: np.ndarray  # (N,) OK / DOMAIN_ERROR / ZERO_VECTOR

    @property
    def ok(self) -> np.ndarray:
        return self.status == OK


def _batch_status(raw: np.ndarray, data: np.ndarray, normalize: bool) -> np.ndarray:
    finite = np.isfinite(data).all(axis=1)
    status = np.where(finite, OK, DOMAIN_ERROR)
    if normalize:
        status = np.where(raw == 0.0, ZERO_VECTOR, status)
    return status.astype(np.int8)


def evaluate_many(field: VectorFieldSpec, points) -> tuple[np.ndarray, np.ndarray]:
    """Values at many points: ``(values (N, 3), status (N,))``."""
    out = field.kernels.value_batch(np.asarray(points, dtype=float))
    return out[:, :3], _batch_status(out[:, 3], out[:, :3], field.normalize)


def evaluate_jets(field: VectorFieldSpec, points) -> JetBatch:
    out = field.kernels.jet_batch(np.asarray(points, dtype=float))
    status = _batch_status(out[:, 12], out[:, :12], field.normalize)
    return JetBatch(out[:, :3], out[:, 3:12].reshape(-1, 3, 3), status)
