"""Numerical checks of the two proof mechanisms.

* Around a point where dV has rank 2, the component of V orthogonal to
  V(p0), followed along a small circle in the plane orthogonal to V(p0),
  turns exactly once in the positive sense.  The sense is the one induced by
  V(p0) as the plane's normal (e1, e2, V(p0) right-handed).
* Where dV has rank 1, the unit line field X spanning ker dV within the
  plane field can be integrated; V is constant along its flow lines and the
  flow lines project (along that constant V) to straight lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diffgeo import DEFAULT_RANK_TOL, frame_for_normal
from .expr import OK, VectorFieldSpec, evaluate, evaluate_jet, evaluate_many

WINDING_DEGENERACY = 1e-9
MAX_RESAMPLES = 3
# sigma2 must sit this far below the rank threshold's scale for a clean kernel
KERNEL_SEPARATION = 1e-6


class RankError(ValueError):
    """dV does not have the rank an operation requires."""


class KernelAmbiguityError(ArithmeticError):
    """The kernel line of dV inside the plane field is numerically ill-defined."""


class WindingError(ArithmeticError):
    """The winding count could not be resolved within the resampling budget."""


@dataclass(frozen=True)
class WindingResult:
    winding: int
    min_norm: float  # smallest |W| seen on the circle
    samples: int
    degenerate: bool
    total_turn: float  # accumulated angle / (2 pi), before rounding


@dataclass(frozen=True)
class FlowCurve:
    times: np.ndarray
    points: np.ndarray  # (len(times), 3)
    step: float


def _circle_turn(field: VectorFieldSpec, p0: np.ndarray, V0: np.ndarray, frame, epsilon: float, n: int):
    phi = 2.0 * np.pi * np.arange(n) / n
    pts = p0 + epsilon * (np.cos(phi)[:, None] * frame.e1 + np.sin(phi)[:, None] * frame.e2)
    V, status = evaluate_many(field, pts)
    if np.any(status != OK):
        bad = int(np.flatnonzero(status != OK)[0])
        raise WindingError(f"field undefined on the circle at {pts[bad].tolist()}")
    W = V - (V @ V0)[:, None] * V0
    w1, w2 = W @ frame.e1, W @ frame.e2
    norms = np.hypot(w1, w2)
    ang = np.arctan2(w2, w1)
    inc = np.diff(np.append(ang, ang[0]))
    inc = np.where(inc > np.pi, inc - 2.0 * np.pi, inc)
    inc = np.where(inc <= -np.pi, inc + 2.0 * np.pi, inc)
    return float(norms.min()), inc


def winding_number(field: VectorFieldSpec, p0, epsilon: float, n_samples: int = 64) -> WindingResult:
    """Turns of W(p) = V(p) - <V(p), V0> V0 as p runs once around the circle of radius epsilon about p0."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if n_samples < 16:
        raise ValueError("n_samples must be at least 16")
    p0 = np.asarray(p0, dtype=float)
    V0 = evaluate(field, p0)
    V0 = V0 / np.linalg.norm(V0)
    frame = frame_for_normal(V0, p0)
    n = n_samples
    for _ in range(MAX_RESAMPLES + 1):
        min_norm, inc = _circle_turn(field, p0, V0, frame, epsilon, n)
        total = float(inc.sum() / (2.0 * np.pi))
        if min_norm < WINDING_DEGENERACY:
            return WindingResult(0, min_norm, n, True, total)
        if np.abs(inc).max() <= np.pi / 2:
            return WindingResult(int(round(total)), min_norm, n, False, total)
        n *= 2
    raise WindingError(f"angle increments still exceed pi/2 with {n // 2} samples")


def _kernel_direction(V: np.ndarray, J: np.ndarray, tol: float) -> np.ndarray:
    _, s, vt = np.linalg.svd(J)
    rank = int(np.count_nonzero(s > tol * max(float(s[0]), 1.0)))
    if rank != 1:
        raise RankError(f"dV has rank {rank}, the kernel line field needs rank 1")
    if s[1] > KERNEL_SEPARATION * s[0]:
        raise KernelAmbiguityError(f"singular values {s[0]:.3e}, {s[1]:.3e} are not clearly separated")
    row = vt[0]  # J = s1 u row^T, so ker J = row^perp
    v = V / np.linalg.norm(V)
    X = np.cross(row, v)
    n = float(np.linalg.norm(X))
    if n < 1e-6:
        raise KernelAmbiguityError("row space of dV is parallel to V; ker dV meets the plane field in a plane")
    return X / n


def sign_normalized(X: np.ndarray) -> np.ndarray:
    """Fix the sign of a line-field direction: the largest-magnitude component is positive (first wins ties)."""
    k = int(np.argmax(np.abs(X) - 1e-12 * np.arange(3)))
    return X if X[k] > 0 else -X


def kernel_line_field(field: VectorFieldSpec, p, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Unit vector spanning ker dV(p) within the plane orthogonal to V(p)."""
    jet = evaluate_jet(field, p)
    return sign_normalized(_kernel_direction(jet.value, jet.jacobian, tol))


def _aligned_kernel(field, p, ref, tol):
    jet = evaluate_jet(field, p)
    X = _kernel_direction(jet.value, jet.jacobian, tol)
    return X if X @ ref >= 0.0 else -X


def _integrate(field, p0, X0, n_steps, h, tol):
    pts = [p0]
    p, X = p0, X0
    for _ in range(n_steps):
        k1 = _aligned_kernel(field, p, X, tol)
        k2 = _aligned_kernel(field, p + 0.5 * h * k1, k1, tol)
        k3 = _aligned_kernel(field, p + 0.5 * h * k2, k2, tol)
        k4 = _aligned_kernel(field, p + h * k3, k3, tol)
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        X = k4
        pts.append(p)
    return pts


def flow_kernel_field(field: VectorFieldSpec, p0, t_max: float = 5.0, step: float = 1e-3, tol: float = DEFAULT_RANK_TOL) -> FlowCurve:
    """Classical RK4 flow of the kernel line field over [-t_max, t_max].

    The line field has no preferred sign; each stage takes the sign that agrees
    with the previous stage, starting from the sign rule at p0.
    """
    p0 = np.asarray(p0, dtype=float)
    n_steps = max(1, int(math.ceil(t_max / step - 1e-9)))
    h = t_max / n_steps
    X0 = kernel_line_field(field, p0, tol)
    fwd = _integrate(field, p0, X0, n_steps, h, tol)
    bwd = _integrate(field, p0, -X0, n_steps, h, tol)
    points = np.array(bwd[:0:-1] + fwd)
    times = h * np.arange(-n_steps, n_steps + 1)
    return FlowCurve(times, points, h)


def projected_straightness(curve: FlowCurve, V0) -> float:
    """Deviation from straightness of the curve projected along V0, relative to its length.

    Points are projected onto the plane through the first point orthogonal to
    V0; the result is the largest distance from the chord through the first and
    last projected points, divided by the projected polyline length.
    """
    P = np.asarray(curve.points, dtype=float)
    if len(P) < 2:
        raise ValueError("need at least two curve points")
    V0 = np.asarray(V0, dtype=float)
    V0 = V0 / np.linalg.norm(V0)
    rel = P - P[0]
    Q = rel - np.outer(rel @ V0, V0)
    length = float(np.linalg.norm(np.diff(Q, axis=0), axis=1).sum())
    if length < 1e-9:
        raise ValueError("projected curve collapses to a point")
    chord = Q[-1] - Q[0]
    c = float(np.linalg.norm(chord))
    if c == 0.0:
        return float(np.linalg.norm(Q, axis=1).max() / length)
    u = chord / c
    off = Q - np.outer(Q @ u, u)
    return float(np.linalg.norm(off, axis=1).max() / length)


def constancy_along_flow(field: VectorFieldSpec, curve: FlowCurve) -> float:
    """max_t |V(gamma(t)) - V(gamma(0))|; gamma(0) is the sample at the time closest to 0."""
    V, status = evaluate_many(field, curve.points)
    if np.any(status != OK):
        raise ValueError("field undefined along the curve")
    ref = V[int(np.argmin(np.abs(np.asarray(curve.times))))]
    return float(np.linalg.norm(V - ref, axis=1).max())
