import numpy as np
import pytest

from linefib.expr import VectorFieldSpec, evaluate, evaluate_jet
from linefib.lemmas import (
    FlowCurve,
    KernelAmbiguityError,
    RankError,
    constancy_along_flow,
    flow_kernel_field,
    kernel_line_field,
    projected_straightness,
    sign_normalized,
    winding_number,
)

from conftest import FIXED_ROTATION


def test_winding_skew_hopf_at_origin(skew_hopf):
    r = winding_number(skew_hopf, (0, 0, 0), 0.1)
    assert r.winding == 1 and not r.degenerate
    assert r.total_turn == pytest.approx(1.0, abs=1e-9)


def test_winding_skew_hopf_random_points(skew_hopf, rng):
    for p in rng.uniform(-1, 1, size=(20, 3)):
        assert winding_number(skew_hopf, p, 0.05).winding == 1


def test_winding_is_stable_under_shrinking(skew_hopf, rng):
    for p in rng.uniform(-1, 1, size=(5, 3)):
        a, b = winding_number(skew_hopf, p, 0.1), winding_number(skew_hopf, p, 0.05)
        assert a.winding == b.winding != 0


def test_winding_survives_rotation(skew_hopf):
    rot = skew_hopf.rotated(FIXED_ROTATION)
    for p in ([0, 0, 0], [0.3, -0.2, 0.5]):
        q = FIXED_ROTATION @ np.array(p, dtype=float)
        assert winding_number(rot, q, 0.05).winding == winding_number(skew_hopf, p, 0.05).winding


def test_winding_degenerate_for_theta_field(theta_linear):
    r = winding_number(theta_linear, (0, 0, 0), 0.1)
    assert r.degenerate and r.winding == 0 and r.min_norm < 1e-9


def test_winding_input_checks(skew_hopf):
    with pytest.raises(ValueError):
        winding_number(skew_hopf, (0, 0, 0), 0.0)
    with pytest.raises(ValueError):
        winding_number(skew_hopf, (0, 0, 0), 0.1, n_samples=8)


def test_sign_rule():
    assert np.array_equal(sign_normalized(np.array([0.1, -0.9, 0.2])), [-0.1, 0.9, -0.2])
    assert np.array_equal(sign_normalized(np.array([0.6, 0.6, 0.0])), [0.6, 0.6, 0.0])
    assert np.array_equal(sign_normalized(np.array([-0.6, 0.6, 0.0])), [0.6, -0.6, -0.0])


def test_kernel_examples(theta_linear):
    assert np.allclose(kernel_line_field(theta_linear, (0, 0, 0)), [0, 1, 0], atol=1e-14)
    X = kernel_line_field(theta_linear, (0, 0, 1))
    assert np.allclose(X, [np.sin(1.0), np.cos(1.0), 0], atol=1e-14)


@pytest.mark.parametrize("name", ["theta-linear", "theta-cubic", "theta-sine"])
def test_kernel_lies_in_kernel_and_plane(gallery, name, rng):
    f = gallery[name]
    for p in rng.uniform(-1, 1, size=(20, 3)):
        jet = evaluate_jet(f, p)
        X = kernel_line_field(f, p)
        assert np.linalg.norm(jet.jacobian @ X) < 1e-8
        assert abs(X @ jet.value) < 1e-10
        assert np.linalg.norm(X) == pytest.approx(1.0, abs=1e-14)


def test_kernel_equivariant_under_rotation(theta_linear, rng):
    rot = theta_linear.rotated(FIXED_ROTATION)
    for p in rng.uniform(-1, 1, size=(5, 3)):
        X = kernel_line_field(theta_linear, p)
        Y = kernel_line_field(rot, FIXED_ROTATION @ p)
        assert abs(abs(Y @ (FIXED_ROTATION @ X)) - 1.0) < 1e-12


def test_kernel_rejects_other_ranks(skew_hopf, constant_field):
    with pytest.raises(RankError):
        kernel_line_field(skew_hopf, (0, 0, 0))
    with pytest.raises(RankError):
        kernel_line_field(constant_field, (0, 0, 0))


def test_kernel_ambiguous_when_row_space_is_v():
    # V = (1, x, 0): dV = e2 (x) e1, row space e1 is nearly V at x = 0
    f = VectorFieldSpec.from_strings("1", "x", "0")
    with pytest.raises(KernelAmbiguityError):
        kernel_line_field(f, (0, 0, 0))


def test_flow_from_origin_stays_on_y_axis(theta_linear):
    c = flow_kernel_field(theta_linear, (0, 0, 0), t_max=1.0, step=1e-2)
    assert c.times[0] == -1.0 and c.times[-1] == 1.0 and len(c.times) == 201
    assert np.abs(c.points[:, [0, 2]]).max() < 1e-14
    assert np.allclose(c.points[:, 1], c.times, atol=1e-12)


def test_flow_from_height_one_keeps_v_constant(theta_linear):
    c = flow_kernel_field(theta_linear, (0, 0, 1), t_max=1.0, step=1e-2)
    V = np.array([evaluate(theta_linear, p) for p in c.points[::20]])
    assert np.abs(V - [np.cos(1.0), -np.sin(1.0), 0]).max() < 1e-12
    assert constancy_along_flow(theta_linear, c) < 1e-12
    assert projected_straightness(c, V[0]) < 1e-12


def test_flow_on_rotated_cubic(theta_cubic, rng):
    rot = theta_cubic.rotated(FIXED_ROTATION)
    for p in rng.uniform(-0.5, 0.5, size=(3, 3)):
        c = flow_kernel_field(rot, p, t_max=1.0, step=1e-2)
        assert constancy_along_flow(rot, c) < 1e-8
        assert projected_straightness(c, evaluate(rot, p)) < 1e-8


def test_flow_refuses_rank_two(skew_hopf):
    with pytest.raises(RankError):
        flow_kernel_field(skew_hopf, (0, 0, 0), t_max=0.1, step=1e-2)


def _curve(points):
    pts = np.asarray(points, dtype=float)
    return FlowCurve(np.arange(len(pts), dtype=float), pts, 1.0)


def test_projected_straightness_examples():
    t = np.linspace(0, 2 * np.pi, 200)
    helix = _curve(np.column_stack([t, np.cos(t), np.sin(t)]))
    assert projected_straightness(helix, (1, 0, 0)) > 0.1
    assert projected_straightness(_curve([[0, 0, 0], [1, 2, 3]]), (0, 0, 1)) == 0.0
    with pytest.raises(ValueError):
        projected_straightness(_curve([[0, 0, 0], [0, 0, 1]]), (0, 0, 1))
    with pytest.raises(ValueError):
        projected_straightness(_curve([[0, 0, 0]]), (0, 0, 1))


def test_constancy_examples(theta_linear, constant_field):
    z = np.linspace(-1, 1, 21)
    seg = FlowCurve(z, np.column_stack([0 * z, 0 * z, z]), 0.1)
    assert constancy_along_flow(theta_linear, seg) > 0.1
    assert constancy_along_flow(constant_field, seg) == 0.0
