import numpy as np
import pytest

from conftest import FIXED_ROTATION, fd_jacobian, fd_value
from linefib.diffgeo import (
    alpha_wedge_dalpha_coeff,
    contact_defect,
    curl,
    curl_from_jacobian,
    frame_for_normal,
    rank_dV,
    xi_frame,
)
from linefib.expr import VectorFieldSpec, evaluate_jet
from linefib.fibration import straightness_defect

THETA = {"z": lambda z: 1.0, "2*z": lambda z: 2.0, "z+z^3/3": lambda z: 1.0 + z * z}

POLY_FIELDS = [
    ("x*y - z^2", "x^2 + y*z", "x - y*z^3"),
    ("1 + x*y*z", "y^2 - x", "z*x + 2*y"),
    ("sin(x*y)", "cos(y+z)", "exp(-x^2)*z"),
    ("-y", "x", "0"),
    ("x^3 - 3*x*y^2", "3*x^2*y - y^3", "x + y + z"),
]


def theta_field(theta: str) -> VectorFieldSpec:
    return VectorFieldSpec.from_strings(f"cos({theta})", f"-sin({theta})", "0")


def test_curl_examples():
    assert not curl(VectorFieldSpec.from_strings("1", "0", "0"), (1, 2, 3)).any()
    assert np.allclose(curl(VectorFieldSpec.from_strings("-y", "x", "0"), (0.3, -2, 1)), [0, 0, 2])
    f = theta_field("z")
    for z in (-1.0, 0.0, 0.7):
        assert np.allclose(curl(f, (0.4, 1.0, z)), [np.cos(z), -np.sin(z), 0.0], atol=1e-15)


def test_curl_against_finite_differences(rng):
    for comps in POLY_FIELDS:
        f = VectorFieldSpec.from_strings(*comps)
        for p in rng.uniform(-1.5, 1.5, size=(5, 3)):
            assert np.allclose(curl(f, p), curl_from_jacobian(fd_jacobian(f, p)), atol=1e-6)


def test_contact_defect_examples(skew_hopf):
    assert contact_defect(VectorFieldSpec.from_strings("1", "0", "0"), (0, 0, 0)) == 0.0
    assert contact_defect(theta_field("z"), (1, -2, 0.3)) == pytest.approx(1.0, abs=1e-15)
    assert contact_defect(skew_hopf, (0, 0, 0)) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("theta", sorted(THETA))
def test_theta_family_law(theta, rng):
    f = theta_field(theta)
    for p in rng.uniform(-2, 2, size=(25, 3)):
        assert abs(contact_defect(f, p) - THETA[theta](p[2])) < 1e-9


def test_wedge_examples():
    assert alpha_wedge_dalpha_coeff(VectorFieldSpec.from_strings("1", "0", "0"), (0, 0, 0)) == 0.0
    assert alpha_wedge_dalpha_coeff(theta_field("z"), (0, 0, 1)) == pytest.approx(1.0, abs=1e-15)


def test_wedge_equals_contact_defect_for_arbitrary_fields(rng):
    for comps in POLY_FIELDS:
        f = VectorFieldSpec.from_strings(*comps)
        for p in rng.uniform(-2, 2, size=(20, 3)):
            assert abs(alpha_wedge_dalpha_coeff(f, p) - contact_defect(f, p)) < 1e-10


def test_wedge_by_explicit_two_form():
    # alpha ^ d alpha written out term by term for alpha = P dx + Q dy + R dz:
    # P (R_y - Q_z) + Q (P_z - R_x) + R (Q_x - P_y)
    f = VectorFieldSpec.from_strings(*POLY_FIELDS[0])
    p = (0.3, -0.7, 1.1)
    jet = evaluate_jet(f, p)
    (P, Q, R), J = jet.value, jet.jacobian
    explicit = P * (J[2, 1] - J[1, 2]) + Q * (J[0, 2] - J[2, 0]) + R * (J[1, 0] - J[0, 1])
    assert alpha_wedge_dalpha_coeff(f, p) == pytest.approx(explicit, abs=1e-13)


def test_rank_examples(skew_hopf):
    assert rank_dV(VectorFieldSpec.from_strings("1", "0", "0"), (0, 0, 0)).rank == 0
    rc = rank_dV(theta_field("z"), (0.5, 0.5, 0.5))
    assert rc.rank == 1
    assert rc.singular_values[0] == pytest.approx(1.0)
    assert rank_dV(skew_hopf, (0, 0, 0)).rank == 2
    assert rank_dV(VectorFieldSpec.from_strings("x", "y", "z"), (1, 1, 1)).rank == 3


def test_rank_threshold_rule():
    rc = rank_dV(VectorFieldSpec.from_strings("1e-9*x", "0", "0"), (0, 0, 0))
    assert rc.rank == 0  # 1e-9 < 1e-8 * max(sigma1, 1)
    assert rc.tol == 1e-8


def test_unit_straight_fields_kill_jacobian_both_sides(skew_hopf, theta_cubic, rng):
    for f in (skew_hopf, theta_cubic):
        for p in rng.uniform(-2, 2, size=(30, 3)):
            jet = evaluate_jet(f, p)
            assert straightness_defect(f, p) < 1e-10
            assert np.linalg.norm(jet.jacobian @ jet.value) < 1e-8
            assert np.linalg.norm(jet.value @ jet.jacobian) < 1e-8
            assert rank_dV(f, p).rank <= 2


def test_rank_invariant_under_rotation(skew_hopf, theta_cubic, rng):
    R = FIXED_ROTATION
    for f in (skew_hopf, theta_cubic, VectorFieldSpec.from_strings("1", "0", "0")):
        g = f.rotated(R)
        for p in rng.uniform(-1, 1, size=(10, 3)):
            assert rank_dV(f, p).rank == rank_dV(g, R @ p).rank


@pytest.mark.parametrize(
    "normal, e1, e2",
    [((0, 0, 1), (1, 0, 0), (0, 1, 0)), ((1, 0, 0), (0, 1, 0), (0, 0, 1))],
)
def test_frame_convention(normal, e1, e2):
    fr = frame_for_normal(normal)
    assert np.allclose(fr.e1, e1) and np.allclose(fr.e2, e2)


def test_frame_orthonormal_right_handed(rng):
    for _ in range(200):
        n = rng.normal(size=3)
        fr = frame_for_normal(n)
        M = np.column_stack([fr.e1, fr.e2, fr.normal])
        off = M.T @ M - np.eye(3)
        assert np.abs(off).max() < 1e-12
        assert np.linalg.det(M) == pytest.approx(1.0, abs=1e-12)


def test_xi_frame_uses_field_direction(skew_hopf):
    fr = xi_frame(skew_hopf, (0, 0, 0))
    assert np.allclose(fr.normal, [0, 0, 1])
    assert np.allclose(fr.e1, [1, 0, 0])
    fr = xi_frame(skew_hopf, (0.3, 0.2, -0.4))
    assert np.allclose(fr.normal, fd_value(skew_hopf, (0.3, 0.2, -0.4)))
