"""Pointwise differential geometry of a vector field V on R^3.

Notes on the contact identity.  For alpha = V1 dx + V2 dy + V3 dz,

    d alpha = sum_{j,i} (d_j V_i) dx_j ^ dx_i,
    alpha ^ d alpha = sum_{k,j,i} V_k (d_j V_i) dx_k ^ dx_j ^ dx_i
                    = (sum_{k,j,i} eps_{kji} V_k d_j V_i) dx ^ dy ^ dz,

and ``sum_{j,i} eps_{kji} d_j V_i`` is the k-th component of curl V.  So the
coefficient of dx^dy^dz equals <V, curl V> for every C^1 field, unit or not.
:func:`alpha_wedge_dalpha_coeff` evaluates the triple sum literally (signs from
permutation parity); :func:`contact_defect` uses the curl.  They are computed
independently so that each can check the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .expr import VectorFieldSpec, ZeroVectorError, evaluate, evaluate_jet

DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class PlaneFrame:
    base: np.ndarray
    normal: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    def to_plane(self, v) -> np.ndarray:
        """Coordinates of the vector ``v`` in the (e1, e2) basis."""
        return np.array([self.e1 @ v, self.e2 @ v])

    def point(self, a: float, b: float) -> np.ndarray:
        return self.base + a * self.e1 + b * self.e2


@dataclass(frozen=True)
class RankClass:
    rank: int
    singular_values: tuple[float, float, float]
    tol: float


def curl_from_jacobian(J: np.ndarray) -> np.ndarray:
    return np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])


def curl(field: VectorFieldSpec, p) -> np.ndarray:
    return curl_from_jacobian(evaluate_jet(field, p).jacobian)


def contact_defect(field: VectorFieldSpec, p) -> float:
    """<V, curl V> at p.  The plane field ker(alpha) is contact near p iff this is nonzero."""
    jet = evaluate_jet(field, p)
    return float(jet.value @ curl_from_jacobian(jet.jacobian))


def _parity(perm: tuple[int, ...]) -> int:
    inversions = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])
    return -1 if inversions % 2 else 1


_LEVI_CIVITA = [(perm, _parity(perm)) for perm in permutations(range(3))]


def wedge_coefficient(V: np.ndarray, J: np.ndarray) -> float:
    """dx^dy^dz coefficient of alpha ^ d alpha with alpha_k = V_k and d_j alpha_i = J[i, j]."""
    total = 0.0
    for (k, j, i), sign in _LEVI_CIVITA:
        total += sign * V[k] * J[i, j]
    return float(total)


def alpha_wedge_dalpha_coeff(field: VectorFieldSpec, p) -> float:
    jet = evaluate_jet(field, p)
    return wedge_coefficient(jet.value, jet.jacobian)


def classify_rank(J: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> RankClass:
    s = np.linalg.svd(J, compute_uv=False)
    threshold = tol * max(float(s[0]), 1.0)
    return RankClass(int(np.count_nonzero(s > threshold)), tuple(float(v) for v in s), tol)


def rank_dV(field: VectorFieldSpec, p, tol: float = DEFAULT_RANK_TOL) -> RankClass:
    return classify_rank(evaluate_jet(field, p).jacobian, tol)


def batch_ranks(jacobians: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Ranks of a stack of 3x3 matrices under the same thresholding rule."""
    if len(jacobians) == 0:
        return np.zeros(0, dtype=int)
    s = np.linalg.svd(jacobians, compute_uv=False)
    threshold = tol * np.maximum(s[:, 0], 1.0)
    return np.count_nonzero(s > threshold[:, None], axis=1)


def frame_for_normal(n, base=(0.0, 0.0, 0.0)) -> PlaneFrame:
    """Right-handed orthonormal frame (e1, e2, n) of the plane through ``base`` with normal ``n``.

    e1 = normalize(a x n) for the first a in (z-axis, y-axis) with |a.n| < 0.9; e2 = n x e1.
    """
    n = np.asarray(n, dtype=float)
    norm = float(np.linalg.norm(n))
    if norm == 0.0:
        raise ZeroVectorError("plane normal is the zero vector")
    n = n / norm
    a = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(a, n)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return PlaneFrame(np.asarray(base, dtype=float), n, e1, e2)


def xi_frame(field: VectorFieldSpec, p) -> PlaneFrame:
    """Orthonormal frame of the plane through p orthogonal to V(p)."""
    return frame_for_normal(evaluate(field, p), p)
