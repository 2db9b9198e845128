import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linefib import _kernels
from linefib.expr import VectorFieldSpec, evaluate, evaluate_many
from linefib.fibration import (
    Box,
    Line,
    Tolerances,
    fibration_audit,
    line_through,
    lines_closest_approach,
    parallel_pairs,
    straightness_defect,
)

X_AXIS = Line(np.zeros(3), np.array([1.0, 0.0, 0.0]))


def test_line_through_examples(constant_field, theta_linear, skew_hopf):
    l = line_through(constant_field, (0, 0, 0))
    assert np.array_equal(l.base, [0, 0, 0]) and np.array_equal(l.direction, [1, 0, 0])
    l = line_through(theta_linear, (0, 5, 0))
    assert np.array_equal(l.direction, [1, 0, 0]) and np.allclose(l.at(2.0), [2, 5, 0])
    assert np.allclose(line_through(skew_hopf, (0, 0, 0)).direction, [0, 0, 1])


def test_line_requires_unit_direction():
    with pytest.raises(ValueError):
        Line(np.zeros(3), np.array([2.0, 0, 0]))


def test_straightness_examples(constant_field, skew_hopf, helix, rng):
    assert straightness_defect(constant_field, (1, 2, 3)) == 0.0
    for p in rng.uniform(-2, 2, size=(100, 3)):
        assert straightness_defect(skew_hopf, p) < 1e-10
    # helix: V = (-y, x, 1)/sqrt(1+r^2); at (1,0,0) J.V = (-1/2, 0, 0)
    assert straightness_defect(helix, (1, 0, 0)) == pytest.approx(0.5, abs=1e-12)


def test_skew_hopf_lines_carry_constant_direction(skew_hopf, rng):
    # construction check: V(p + t V(p)) = V(p)
    for p in rng.uniform(-1, 1, size=(20, 3)):
        v = evaluate(skew_hopf, p)
        ts = np.linspace(-3, 3, 13)
        V, _ = evaluate_many(skew_hopf, p + ts[:, None] * v)
        assert np.abs(V - v).max() < 1e-12


def test_closest_approach_skew_pair():
    r = lines_closest_approach(X_AXIS, Line(np.array([0.0, 0, 1]), np.array([0.0, 1, 0])))
    assert (r.t1, r.t2, r.gap, r.parallel) == (0.0, 0.0, 1.0, False)


def test_closest_approach_crossing():
    r = lines_closest_approach(X_AXIS, Line(np.array([1.0, -1, 0]), np.array([0.0, 1, 0])))
    assert (r.t1, r.t2, r.gap, r.parallel) == (1.0, 1.0, 0.0, False)


def test_closest_approach_parallel():
    eps = 1e-3
    r = lines_closest_approach(X_AXIS, Line(np.array([0.0, 0, eps]), np.array([1.0, 0, 0])))
    assert r.parallel and r.t1 == 0.0 and r.t2 == 0.0
    assert r.gap == pytest.approx(eps, abs=1e-18)


unit = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 0.1).map(
    lambda v: np.array(v) / np.linalg.norm(v)
)
point = st.tuples(*[st.floats(-10, 10)] * 3).map(np.array)


@settings(max_examples=200, deadline=None)
@given(point, unit, point, unit)
def test_closest_approach_symmetric(b1, d1, b2, d2):
    l1, l2 = Line(b1, d1), Line(b2, d2)
    a, b = lines_closest_approach(l1, l2), lines_closest_approach(l2, l1)
    assert (a.t1, a.t2, a.gap, a.parallel) == (b.t2, b.t1, b.gap, b.parallel)


@settings(max_examples=200, deadline=None)
@given(point, unit, st.floats(-5, 5), unit)
def test_zero_gap_points_coincide(b1, d1, s, d2):
    # build l2 through a point of l1 so the true gap is 0
    if abs(d1 @ d2) > 0.999:
        return
    l1 = Line(b1, d1)
    l2 = Line(b1 + s * d1 - 2.0 * d2, d2)
    r = lines_closest_approach(l1, l2)
    assert r.gap < 1e-9
    assert np.linalg.norm(l1.at(r.t1) - l2.at(r.t2)) < 1e-9


def test_box_validation_and_enlargement():
    with pytest.raises(ValueError):
        Box((0, 0, 0), (1, 0, 1))
    big = Box.cube(-1, 1).enlarged()
    assert big.lo == (-1.5,) * 3 and big.hi == (1.5,) * 3


def test_audit_skew_hopf(skew_hopf):
    rep = fibration_audit(skew_hopf, Box.cube(-1, 1), 5)
    assert rep.intersections == [] and rep.parallel_pairs == []
    assert rep.rank_profile == "constant 2"
    assert rep.is_fibration_on_box and rep.is_contact_on_box


def test_audit_theta_field(theta_linear):
    rep = fibration_audit(theta_linear, Box.cube(-1, 1), 5)
    assert rep.intersections == []
    assert rep.rank_profile == "constant 1"
    assert rep.is_fibration_on_box
    # 5 horizontal planes; z = 0 has 5 lines of 5 points, the others 25 distinct lines
    same_plane_distinct = 4 * (25 * 24 // 2) + (25 * 24 // 2 - 5 * (5 * 4 // 2))
    assert len(rep.parallel_pairs) == same_plane_distinct
    z = rep.points[:, 2]
    assert all(z[i] == z[j] for i, j, _ in rep.parallel_pairs)


def test_audit_helix_is_not_a_fibration(helix):
    rep = fibration_audit(helix, Box.cube(-1, 1), 5)
    assert rep.straightness_defect_max > 0.1
    assert not rep.is_fibration_on_box


def test_audit_detects_crossing_lines():
    # radial field away from the origin: all lines pass through the origin
    f = VectorFieldSpec.from_strings("x", "y", "z+0.5", normalize=True)
    rep = fibration_audit(f, Box.cube(-1, 1), 3, Tolerances(straightness=1.0))
    assert rep.intersections
    assert not rep.is_fibration_on_box


def _brute_force_pairs(points, dirs, box, tol):
    """Independent O(n^2) loop over explicit 2x2 solves."""
    big = box.enlarged()
    hits, par = [], []
    for i, j in itertools.combinations(range(len(points)), 2):
        d1, d2, w = dirs[i], dirs[j], points[j] - points[i]
        ang = np.arccos(np.clip(abs(d1 @ d2), -1, 1))
        if ang < tol.angle:
            if np.linalg.norm(np.cross(w, d1)) >= tol.intersection:
                par.append((i, j))
            continue
        A = np.array([[d1 @ d1, -(d1 @ d2)], [d1 @ d2, -(d2 @ d2)]])
        t1, t2 = np.linalg.solve(A, [w @ d1, w @ d2])
        p, q = points[i] + t1 * d1, points[j] + t2 * d2
        if np.linalg.norm(p - q) < tol.intersection and np.all(np.abs(p - big.center) <= big.half_widths + 1e-12) and np.all(
            np.abs(q - big.center) <= big.half_widths + 1e-12
        ):
            hits.append((i, j))
    return hits, par


@pytest.mark.parametrize("name", ["skew-hopf", "theta-linear", "constant"])
def test_audit_matches_brute_force(gallery, name):
    f = gallery[name]
    box = Box.cube(-1, 1)
    rep = fibration_audit(f, box, 4)
    V, _ = evaluate_many(f, rep.points)
    hits, par = _brute_force_pairs(rep.points, V, box, Tolerances())
    assert [(r["i"], r["j"]) for r in rep.intersections] == hits
    assert [(i, j) for i, j, _ in rep.parallel_pairs] == par


def test_parallel_pairs_examples(constant_field, skew_hopf, theta_linear):
    box = Box.cube(-1, 1)
    pairs = parallel_pairs(constant_field, box, 3)
    # 27 points on 9 x-lines; pairs on distinct lines
    assert len(pairs) == 27 * 26 // 2 - 9 * 3
    assert parallel_pairs(skew_hopf, box, 5, 1e-3) == []
    pts = box.grid(4)
    for (i, j), _ in parallel_pairs(theta_linear, box, 4):
        assert pts[i, 2] == pts[j, 2]


def test_consistency_of_pointwise_and_line_views(skew_hopf):
    box = Box.cube(-1, 1)
    rep = fibration_audit(skew_hopf, box, 4)
    assert rep.is_fibration_on_box
    big = box.enlarged()
    V, _ = evaluate_many(skew_hopf, rep.points)
    clip = _kernels.clip_to_box(rep.points, V, big.lo, big.hi)
    for p, v, (t0, t1) in zip(rep.points, V, clip):
        ts = np.linspace(t0, t1, 7)
        W, _ = evaluate_many(skew_hopf, p + ts[:, None] * v)
        assert np.abs(W - v).max() < 1e-8


def test_audit_is_deterministic(skew_hopf):
    a = fibration_audit(skew_hopf, Box.cube(-1, 1), 4).to_dict()
    b = fibration_audit(skew_hopf, Box.cube(-1, 1), 4).to_dict()
    assert repr(a) == repr(b)


def test_audit_records_evaluation_errors():
    f = VectorFieldSpec.from_strings("x", "y", "z", normalize=True)
    rep = fibration_audit(f, Box.cube(-1, 1), 3)
    assert rep.evaluation_errors == [{"index": 13, "point": [0.0, 0.0, 0.0], "error": "zero vector"}]
    assert not rep.is_fibration_on_box


def test_audit_needs_two_points():
    with pytest.raises(ValueError):
        fibration_audit(VectorFieldSpec.from_strings("1", "0", "0"), Box.cube(-1, 1), 1)
