"""Oriented lines and box-local audits of the fibration property.

An audit samples a regular grid on a box, so it can only ever report that no
violation was found at the chosen resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .diffgeo import DEFAULT_RANK_TOL, batch_ranks
from .expr import OK, ZERO_VECTOR, VectorFieldSpec, ZeroVectorError, evaluate, evaluate_jet, evaluate_jets, evaluate_many

BOX_ENLARGEMENT = 1.5


@dataclass(frozen=True)
class Line:
    base: np.ndarray
    direction: np.ndarray  # unit, oriented

    def __post_init__(self):
        if abs(float(np.linalg.norm(self.direction)) - 1.0) > 1e-12:
            raise ValueError("line direction must be a unit vector")

    def at(self, t: float) -> np.ndarray:
        return self.base + t * self.direction


@dataclass(frozen=True)
class Box:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self):
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"box needs lo < hi componentwise, got {self.lo} / {self.hi}")

    @classmethod
    def cube(cls, lo: float, hi: float) -> "Box":
        return cls((lo,) * 3, (hi,) * 3)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.array(self.lo) + np.array(self.hi))

    @property
    def half_widths(self) -> np.ndarray:
        return 0.5 * (np.array(self.hi) - np.array(self.lo))

    def enlarged(self, factor: float = BOX_ENLARGEMENT) -> "Box":
        c, h = self.center, factor * self.half_widths
        return Box(tuple(c - h), tuple(c + h))

    def grid(self, n: int) -> np.ndarray:
        """Regular ``n^3`` grid, flattened in C order (x slowest)."""
        axes = [np.linspace(a, b, n) for a, b in zip(self.lo, self.hi)]
        X, Y, Z = np.meshgrid(*axes, indexing="ij")
        return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)


@dataclass(frozen=True)
class Tolerances:
    unit: float = 1e-10
    straightness: float = 1e-8
    intersection: float = 1e-7
    angle: float = 1e-6
    rank: float = DEFAULT_RANK_TOL
    contact: float = 1e-9


@dataclass(frozen=True)
class Approach:
    t1: float
    t2: float
    gap: float
    parallel: bool


def line_through(field: VectorFieldSpec, p) -> Line:
    v = evaluate(field, p)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ZeroVectorError(f"no line through {tuple(p)}: V vanishes there")
    return Line(np.asarray(p, dtype=float), v / n)


def straightness_defect(field: VectorFieldSpec, p) -> float:
    """|J(p) V(p)|: the rate at which V turns along its own direction."""
    jet = evaluate_jet(field, p)
    return float(np.linalg.norm(jet.jacobian @ jet.value))


def lines_closest_approach(l1: Line, l2: Line) -> Approach:
    t1, t2, gap, _, par = _kernels.pair_scan(
        np.array([l1.base, l2.base]), np.array([l1.direction, l2.direction]), use_numba=False
    )
    return Approach(float(t1[0]), float(t2[0]), float(gap[0]), bool(par[0]))


def _unoriented_parallel(angle: np.ndarray, tol: float) -> np.ndarray:
    return (angle < tol) | (np.pi - angle < tol)


@dataclass
class AuditReport:
    box: Box
    n_per_axis: int
    tolerances: Tolerances
    points: np.ndarray
    status: np.ndarray
    unit_defect_max: float
    straightness_defect_max: float
    intersections: list[dict]
    parallel_pairs: list[tuple[int, int, float]]
    ranks: np.ndarray
    contact_defects: np.ndarray
    evaluation_errors: list[dict] = dc_field(default_factory=list)

    @property
    def rank_histogram(self) -> dict[str, int]:
        valid = self.ranks[self.status == OK]
        return {str(r): int(np.count_nonzero(valid == r)) for r in range(4)}

    @property
    def rank_profile(self) -> str:
        present = [r for r, c in self.rank_histogram.items() if c]
        return f"constant {present[0]}" if len(present) == 1 else "mixed"

    @property
    def contact_defect_min(self) -> float:
        d = self.contact_defects[self.status == OK]
        return float(d.min()) if d.size else float("nan")

    @property
    def contact_defect_max(self) -> float:
        d = self.contact_defects[self.status == OK]
        return float(d.max()) if d.size else float("nan")

    @property
    def contact_zero_set_detected(self) -> bool:
        d = self.contact_defects[self.status == OK]
        if d.size == 0:
            return True
        tol = self.tolerances.contact
        return bool(np.any(np.abs(d) <= tol) or (d.min() < 0.0 < d.max()))

    @property
    def is_contact_on_box(self) -> bool:
        return not self.evaluation_errors and not self.contact_zero_set_detected

    @property
    def is_fibration_on_box(self) -> bool:
        tol = self.tolerances
        return (
            not self.evaluation_errors
            and self.unit_defect_max <= tol.unit
            and self.straightness_defect_max <= tol.straightness
            and not self.intersections
        )

    def to_dict(self) -> dict:
        return {
            "grid": [self.n_per_axis] * 3,
            "n_points": int(len(self.points)),
            "unit_defect_max": self.unit_defect_max,
            "straightness_defect_max": self.straightness_defect_max,
            "intersections": self.intersections,
            "parallel_pairs_count": len(self.parallel_pairs),
            "rank_histogram": self.rank_histogram,
            "rank_profile": self.rank_profile,
            "contact_defect_min": self.contact_defect_min,
            "contact_defect_max": self.contact_defect_max,
            "evaluation_errors": self.evaluation_errors,
            "is_fibration_on_box": self.is_fibration_on_box,
            "is_contact_on_box": self.is_contact_on_box,
            "note": f"box-local evidence: no violation found at resolution {self.n_per_axis}"
            if self.is_fibration_on_box
            else f"violation found at resolution {self.n_per_axis}",
        }


def _scan(points, directions, box: Box, tol: Tolerances):
    """Intersecting and parallel pairs among the sampled lines."""
    big = box.enlarged()
    clip = _kernels.clip_to_box(points, directions, big.lo, big.hi)
    t1, t2, gap, angle, _ = _kernels.pair_scan(points, directions)
    I, J = np.triu_indices(len(points), k=1)
    par = _unoriented_parallel(angle, tol.angle)
    # same line: parallel, and the base offset lies along the direction
    w = points[I] - points[J]
    perp = np.linalg.norm(np.cross(w, directions[I]), axis=1)
    same = par & (gap < tol.intersection) & (perp < tol.intersection)
    inside = (
        (t1 >= clip[I, 0]) & (t1 <= clip[I, 1]) & (t2 >= clip[J, 0]) & (t2 <= clip[J, 1])
    )
    hit = (gap < tol.intersection) & inside & ~same
    intersections = [
        {"i": int(I[k]), "j": int(J[k]), "t1": float(t1[k]), "t2": float(t2[k]), "gap": float(gap[k])}
        for k in np.flatnonzero(hit)
    ]
    parallel = [(int(I[k]), int(J[k]), float(min(angle[k], np.pi - angle[k]))) for k in np.flatnonzero(par & ~same)]
    return intersections, parallel


@dataclass(frozen=True)
class GridSurvey:
    """Pointwise data on the grid, before any pairwise work."""

    points: np.ndarray
    status: np.ndarray
    values: np.ndarray
    jacobians: np.ndarray
    ranks: np.ndarray  # -1 where evaluation failed
    contact_defects: np.ndarray  # nan where evaluation failed
    errors: list[dict]

    @property
    def good(self) -> np.ndarray:
        return self.status == OK


def grid_survey(field: VectorFieldSpec, box: Box, n_per_axis: int, rank_tol: float = DEFAULT_RANK_TOL) -> GridSurvey:
    if n_per_axis < 2:
        raise ValueError("n_per_axis must be at least 2")
    points = box.grid(n_per_axis)
    jets = evaluate_jets(field, points)
    V, Jac, status = jets.values, jets.jacobians, jets.status.copy()
    norms = np.linalg.norm(V, axis=1)
    status[(status == OK) & (norms == 0.0)] = ZERO_VECTOR
    errors = [
        {"index": int(k), "point": points[k].tolist(), "error": "zero vector" if status[k] == ZERO_VECTOR else "domain"}
        for k in np.flatnonzero(status != OK)
    ]
    good = status == OK
    ranks = np.full(len(points), -1)
    ranks[good] = batch_ranks(Jac[good], rank_tol)
    curls = np.stack([Jac[:, 2, 1] - Jac[:, 1, 2], Jac[:, 0, 2] - Jac[:, 2, 0], Jac[:, 1, 0] - Jac[:, 0, 1]], axis=1)
    defects = np.where(good, np.einsum("ki,ki->k", V, curls), np.nan)
    return GridSurvey(points, status, V, Jac, ranks, defects, errors)


def fibration_audit(field: VectorFieldSpec, box: Box, n_per_axis: int, tolerances: Tolerances | None = None) -> AuditReport:
    """Sample the grid, then check unit length, straightness and pairwise intersections of the lines."""
    tol = tolerances or Tolerances()
    sv = grid_survey(field, box, n_per_axis, tol.rank)
    good = sv.good
    V, Jac = sv.values[good], sv.jacobians[good]
    norms = np.linalg.norm(V, axis=1)
    unit = np.abs(norms - 1.0)
    straight = np.linalg.norm(np.einsum("kij,kj->ki", Jac, V), axis=1)
    idx = np.flatnonzero(good)
    intersections, parallel = _scan(sv.points[good], V / norms[:, None], box, tol)
    for rec in intersections:
        rec["i"], rec["j"] = int(idx[rec["i"]]), int(idx[rec["j"]])
    parallel = [(int(idx[i]), int(idx[j]), a) for i, j, a in parallel]
    return AuditReport(
        box=box,
        n_per_axis=n_per_axis,
        tolerances=tol,
        points=sv.points,
        status=sv.status,
        unit_defect_max=float(unit.max()) if unit.size else float("nan"),
        straightness_defect_max=float(straight.max()) if straight.size else float("nan"),
        intersections=intersections,
        parallel_pairs=parallel,
        ranks=sv.ranks,
        contact_defects=sv.contact_defects,
        evaluation_errors=sv.errors,
    )


def parallel_pairs(field: VectorFieldSpec, box: Box, n_per_axis: int, angle_tol: float = 1e-6) -> list[tuple[tuple[int, int], float]]:
    """Pairs of grid points on distinct lines whose directions are parallel within ``angle_tol``."""
    tol = Tolerances(angle=angle_tol)
    points = box.grid(n_per_axis)
    V, status = evaluate_many_unit(field, points)
    idx = np.flatnonzero(status == OK)
    _, parallel = _scan(points[idx], V[idx], box, tol)
    return [((int(idx[i]), int(idx[j])), a) for i, j, a in parallel]


def evaluate_many_unit(field: VectorFieldSpec, points):
    """Unit directions at many points, with zero vectors flagged in the status array."""
    V, status = evaluate_many(field, points)
    status = status.copy()
    norms = np.linalg.norm(V, axis=1)
    status[(status == OK) & (norms == 0.0)] = ZERO_VECTOR
    safe = np.where(norms > 0.0, norms, 1.0)
    return V / safe[:, None], status
