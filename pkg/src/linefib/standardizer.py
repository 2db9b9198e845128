"""Normal form of rank-1 contact line fibrations and the standardizing map.

In adapted coordinates a line fibration whose dV has rank 1 reads
V(x, y, z) = (cos t(z), -sin t(z), 0) with t(0) = 0 and t' nowhere zero.  The map

    Phi(x, y, z) = (z cos t(y) + (x / t'(y)) sin t(y),
                    -z sin t(y) + (x / t'(y)) cos t(y),
                    y)

pulls cos t(w) du - sin t(w) dv back to dz + x dy.  Expanding, the dz and
dx coefficients are cos^2 + sin^2 = 1 and (cos sin - sin cos) / t' = 0; the z dy
terms cancel pairwise; and the x dy coefficient is t'/t' = 1 because the
t''/t'^2 terms from d(x / t') cancel between the two components.  The
identity therefore holds exactly whenever the t' in Phi is the derivative of
the t in the form, which is why a sampled profile is turned into a single C^2
spline and both t' and t'' are read from that spline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .diffgeo import DEFAULT_RANK_TOL, classify_rank
from .expr import (
    OK,
    DualNumber3,
    EvaluationError,
    VectorFieldSpec,
    derivative,
    evaluate,
    evaluate_dual,
    evaluate_jet,
    evaluate_jets,
    evaluate_many,
    parse_expression,
    to_text,
)
from .expr.dual import dual_cos, dual_sin, seed
from .fibration import Box, Tolerances, fibration_audit
from .lemmas import RankError, flow_kernel_field, kernel_line_field, projected_straightness, constancy_along_flow, winding_number

PLANE_TOL = 1e-7
THETA_PRIME_MIN = 1e-9
MAX_REFINEMENTS = 3
PULLBACK_TOL = 1e-8
TIGHTNESS_CITATION = (
    "tight by Harrison (2019), Theorem 2 (cited, not computed); "
    "hence diffeomorphic to the standard structure by Eliashberg's classification"
)

NOT_A_FIBRATION_ON_BOX = "NOT_A_FIBRATION_ON_BOX"
FIBRATION_NOT_CONTACT = "FIBRATION_NOT_CONTACT"
CONTACT_RANK2_SKEW = "CONTACT_RANK2_SKEW"
CONTACT_RANK1_STANDARDIZED = "CONTACT_RANK1_STANDARDIZED"
MIXED_RANK = "MIXED_RANK"


class FrameError(ValueError):
    """The field is not of normal form around the chosen base point."""


class ThetaError(ValueError):
    """The angle profile violates the normal-form requirements."""

    def __init__(self, message: str, z_zero: float | None = None):
        super().__init__(message)
        self.z_zero = z_zero


class StandardizationError(ArithmeticError):
    """A step of the rank-1 pipeline failed numerically."""


@dataclass(frozen=True)
class AffineFrame:
    origin: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """Columns e1, e2, e3."""
        return np.column_stack([self.e1, self.e2, self.e3])

    def to_world(self, q) -> np.ndarray:
        return self.origin + np.asarray(q, dtype=float) @ self.matrix.T

    def to_local(self, p) -> np.ndarray:
        return (np.asarray(p, dtype=float) - self.origin) @ self.matrix


def find_normal_frame(
    field: VectorFieldSpec,
    p0,
    tol: float = DEFAULT_RANK_TOL,
    patch_half_width: float = 0.5,
    patch_n: int = 5,
) -> AffineFrame:
    """Frame (V(p0), X(p0), V(p0) x X(p0)) at p0, checked against the plane spanned by the first two axes.

    On that plane V must equal V(p0); otherwise the field is not locally of
    normal form at p0 and :class:`FrameError` is raised.
    """
    p0 = np.asarray(p0, dtype=float)
    rc = classify_rank(evaluate_jet(field, p0).jacobian, tol)
    if rc.rank != 1:
        raise RankError(f"dV has rank {rc.rank} at {p0.tolist()}, the normal form needs rank 1")
    V0 = evaluate(field, p0)
    # "+ 0.0" turns negative zeros into zeros so reports print cleanly
    e1 = V0 / np.linalg.norm(V0) + 0.0
    e2 = kernel_line_field(field, p0, tol) + 0.0
    e3 = np.cross(e1, e2) + 0.0
    frame = AffineFrame(p0, e1, e2, e3)
    ab = np.linspace(-patch_half_width, patch_half_width, patch_n)
    A, B = np.meshgrid(ab, ab, indexing="ij")
    patch = p0 + A.ravel()[:, None] * e1 + B.ravel()[:, None] * e2
    V, status = evaluate_many(field, patch)
    if np.any(status != OK):
        raise FrameError("field undefined on the validation patch")
    dev = float(np.linalg.norm(V - e1, axis=1).max())
    if dev > PLANE_TOL:
        raise FrameError(f"V deviates from V(p0) by {dev:.3e} on the plane through p0; not locally of normal form")
    return frame


@dataclass(frozen=True)
class ThetaProfile:
    z: np.ndarray
    theta: np.ndarray
    theta_prime: np.ndarray
    max_out_of_plane: float = 0.0

    @cached_property
    def spline(self) -> CubicSpline:
        # clamp the ends with the sampled slopes; natural ends force t'' = 0 there
        return CubicSpline(self.z, self.theta, bc_type=((1, self.theta_prime[0]), (1, self.theta_prime[-1])))

    def derivs(self, y: float) -> tuple[float, float, float]:
        s = self.spline
        return float(s(y)), float(s(y, 1)), float(s(y, 2))

    @property
    def window(self) -> tuple[float, float]:
        return float(self.z[0]), float(self.z[-1])


@dataclass(frozen=True)
class ClosedFormTheta:
    """Angle profile given as an expression in ``z``; t' and t'' come from dual numbers."""

    expression: object
    text: str = dc_field(default="", compare=False)

    @classmethod
    def parse(cls, text: str) -> "ClosedFormTheta":
        expr = parse_expression(text)
        return cls(expr, to_text(expr))

    @cached_property
    def _first(self):
        return derivative(self.expression, "z")

    def derivs(self, y: float) -> tuple[float, float, float]:
        args = seed((0.0, 0.0, y))
        t = evaluate_dual(self.expression, *args)
        tp = evaluate_dual(self._first, *args)
        return t.value, t.partials[2], tp.partials[2]


def _odd(n: int) -> int:
    return n if n % 2 else n + 1


def _profile_on(field: VectorFieldSpec, frame: AffineFrame, Z: float, n: int):
    z = np.linspace(-Z, Z, n)
    pts = frame.origin + z[:, None] * frame.e3
    jets = evaluate_jets(field, pts)
    if np.any(jets.status != OK):
        k = int(np.flatnonzero(jets.status != OK)[0])
        raise ThetaError(f"field undefined at z = {z[k]:.6g} on the profile axis")
    V = jets.values
    dV = np.einsum("kij,j->ki", jets.jacobians, frame.e3)
    c, s, r = V @ frame.e1, -(V @ frame.e2), V @ frame.e3
    dc, ds = dV @ frame.e1, -(dV @ frame.e2)
    theta_prime = (c * ds - s * dc) / (c * c + s * s)
    return z, c, s, r, theta_prime


def _unwrap_from_center(c, s):
    raw = np.arctan2(s, c)
    mid = len(raw) // 2
    theta = np.empty_like(raw)
    theta[mid] = raw[mid]
    steps = []
    for k in range(mid + 1, len(raw)):
        d = (raw[k] - raw[k - 1] + np.pi) % (2.0 * np.pi) - np.pi
        theta[k] = theta[k - 1] + d
        steps.append(abs(d))
    for k in range(mid - 1, -1, -1):
        d = (raw[k] - raw[k + 1] + np.pi) % (2.0 * np.pi) - np.pi
        theta[k] = theta[k + 1] + d
        steps.append(abs(d))
    return theta, max(steps, default=0.0)


def recover_theta(field: VectorFieldSpec, frame: AffineFrame, Z: float, n: int = 201) -> ThetaProfile:
    """Sample the angle t(z) along the third frame axis; t(0) = 0 at the frame origin.

    The grid always contains z = 0 (``n`` is bumped to odd).  If successive
    samples differ by pi/2 or more the grid is refined, at most three times.
    """
    if Z <= 0:
        raise ValueError("Z must be positive")
    n = _odd(max(n, 3))
    for _ in range(MAX_REFINEMENTS + 1):
        z, c, s, r, theta_prime = _profile_on(field, frame, Z, n)
        r_max = float(np.abs(r).max())
        if r_max >= PLANE_TOL:
            k = int(np.argmax(np.abs(r)))
            raise ThetaError(f"V leaves the horizontal planes (component {r[k]:.3e} along e3 at z = {z[k]:.6g})")
        theta, worst = _unwrap_from_center(c, s)
        if worst < np.pi / 2:
            break
        n = 2 * n - 1
    else:
        raise ThetaError("angle profile still aliased after refinement")
    _check_theta_prime(z, theta_prime)
    return ThetaProfile(z, theta, theta_prime, r_max)


def _check_theta_prime(z: np.ndarray, tp: np.ndarray) -> None:
    small = np.flatnonzero(np.abs(tp) < THETA_PRIME_MIN)
    if small.size:
        k = int(small[0])
        raise ThetaError(f"t' vanishes at z = {z[k]:.6g}; the plane field is not contact there", float(z[k]))
    flips = np.flatnonzero(np.sign(tp[1:]) != np.sign(tp[:-1]))
    if flips.size:
        k = int(flips[0])
        z0 = z[k] - tp[k] * (z[k + 1] - z[k]) / (tp[k + 1] - tp[k])
        raise ThetaError(
            f"t' changes sign near z = {z0:.6g}; the plane field is not contact there", float(z0)
        )


def standardizing_diffeo(theta, p) -> np.ndarray:
    """Phi(p) for the angle profile ``theta`` (anything with ``derivs(y) -> (t, t', t'')``)."""
    x, y, z = (float(c) for c in p)
    t, tp, _ = theta.derivs(y)
    if tp == 0.0:
        raise ThetaError(f"t'({y}) = 0, the map is undefined", y)
    c, s = math.cos(t), math.sin(t)
    return np.array([z * c + (x / tp) * s, -z * s + (x / tp) * c, y])


def standardizing_jet(theta, p) -> tuple[np.ndarray, np.ndarray]:
    """Phi(p) and its Jacobian, by dual-number evaluation of Phi."""
    x, y, z = seed(p)
    t, tp, tpp = theta.derivs(y.value)
    if tp == 0.0:
        raise ThetaError(f"t'({y.value}) = 0, the map is undefined", y.value)
    th = DualNumber3(t, tuple(tp * d for d in y.partials))
    thp = DualNumber3(tp, tuple(tpp * d for d in y.partials))
    c, s = dual_cos(th), dual_sin(th)
    q = x / thp
    out = (z * c + q * s, -(z * s) + q * c, y)
    return np.array([o.value for o in out]), np.array([o.partials for o in out])


def pullback_coefficients(theta, p) -> np.ndarray:
    """(Phi^* alpha)_p in the basis dx, dy, dz, where alpha = cos t(w) du - sin t(w) dv."""
    image, dphi = standardizing_jet(theta, p)
    t, _, _ = theta.derivs(float(image[2]))
    alpha = np.array([math.cos(t), -math.sin(t), 0.0])
    return alpha @ dphi


def verify_pullback(theta, sample_points, tol: float | None = None) -> float:
    """Largest coefficient error of Phi^* alpha against dz + x dy over the samples.

    With ``tol`` set, a larger error raises :class:`StandardizationError`.
    """
    worst = 0.0
    for p in np.asarray(sample_points, dtype=float).reshape(-1, 3):
        beta = pullback_coefficients(theta, p)
        target = np.array([0.0, p[0], 1.0])
        worst = max(worst, float(np.abs(beta - target).max()))
    if tol is not None and not worst < tol:
        raise StandardizationError(f"pullback defect {worst:.3e} exceeds {tol:.1e}")
    return worst


def normal_form_defect(field: VectorFieldSpec, frame: AffineFrame, theta, local_points) -> float:
    """max |V - (cos t(c), -sin t(c), 0)| over points given in frame coordinates (a, b, c)."""
    local = np.asarray(local_points, dtype=float).reshape(-1, 3)
    V, status = evaluate_many(field, frame.to_world(local))
    if np.any(status != OK):
        raise EvaluationError("field undefined at a normal-form sample")
    Vl = V @ frame.matrix
    ts = np.array([theta.derivs(float(c))[0] for c in local[:, 2]])
    model = np.stack([np.cos(ts), -np.sin(ts), np.zeros_like(ts)], axis=1)
    return float(np.linalg.norm(Vl - model, axis=1).max())


def theta_window(frame: AffineFrame, box: Box) -> float:
    """Half-length of the box's extent along e3, measured from the box centre."""
    return float(np.abs(frame.e3) @ box.half_widths)


@dataclass
class Classification:
    verdict: str
    audit: object
    diagnostics: dict = dc_field(default_factory=dict)
    frame: AffineFrame | None = None
    profile: ThetaProfile | None = None
    pullback_defect: float | None = None
    closed_form_pullback_defect: float | None = None
    normal_form_defect: float | None = None
    winding: object | None = None
    flow: dict | None = None
    citation: str | None = None


def classify_field(
    field: VectorFieldSpec,
    box: Box,
    n_per_axis: int = 5,
    tolerances: Tolerances | None = None,
    seed: int = 42,
    theta: ClosedFormTheta | None = None,
    theta_samples: int = 201,
    n_pullback: int = 100,
    flow_step: float = 1e-2,
) -> Classification:
    """Audit, contact test and rank profile, then the matching normal-form treatment."""
    tol = tolerances or Tolerances()
    audit = fibration_audit(field, box, n_per_axis, tol)
    out = Classification(verdict=MIXED_RANK, audit=audit)
    if not audit.is_fibration_on_box:
        out.verdict = NOT_A_FIBRATION_ON_BOX
        return out
    profile = audit.rank_profile
    if not audit.is_contact_on_box:
        out.verdict = FIBRATION_NOT_CONTACT
        if profile == "constant 1":
            _locate_contact_failure(field, box, theta_samples, tol, out)
        return out
    center = box.center
    if profile == "constant 2":
        out.verdict = CONTACT_RANK2_SKEW
        out.citation = TIGHTNESS_CITATION
        eps = 0.05 * float(box.half_widths.min())
        out.winding = winding_number(field, center, eps)
        if audit.parallel_pairs:
            out.diagnostics["warning"] = "parallel lines sampled despite rank 2 everywhere"
        return out
    if profile != "constant 1":
        return out
    try:
        frame = find_normal_frame(field, center, tol.rank)
        Z = theta_window(frame, box)
        prof = recover_theta(field, frame, Z, theta_samples)
    except ThetaError as exc:
        out.verdict = FIBRATION_NOT_CONTACT
        out.diagnostics["theta_error"] = str(exc)
        out.diagnostics["theta_prime_zero_near"] = exc.z_zero
        return out
    except FrameError as exc:
        raise StandardizationError(str(exc)) from exc
    rng = np.random.default_rng(seed)
    local = rng.uniform(-Z, Z, size=(n_pullback, 3))
    out.frame, out.profile = frame, prof
    out.pullback_defect = verify_pullback(prof, local, PULLBACK_TOL)
    if theta is not None:
        out.closed_form_pullback_defect = verify_pullback(theta, local, PULLBACK_TOL)
    out.normal_form_defect = normal_form_defect(field, frame, prof, local)
    t_max = float(box.half_widths.min())
    curve = flow_kernel_field(field, center, t_max, flow_step, tol.rank)
    out.flow = {
        "start": center.tolist(),
        "t_max": t_max,
        "step": curve.step,
        "n_points": int(len(curve.points)),
        "constancy": constancy_along_flow(field, curve),
        "projected_straightness": projected_straightness(curve, frame.e1),
    }
    out.verdict = CONTACT_RANK1_STANDARDIZED
    return out


def _locate_contact_failure(field, box, theta_samples, tol, out: Classification) -> None:
    try:
        frame = find_normal_frame(field, box.center, tol.rank)
        recover_theta(field, frame, theta_window(frame, box), theta_samples)
    except ThetaError as exc:
        out.diagnostics["theta_error"] = str(exc)
        out.diagnostics["theta_prime_zero_near"] = exc.z_zero
    except (RankError, FrameError, EvaluationError, ArithmeticError) as exc:
        out.diagnostics["normal_form_unavailable"] = str(exc)
