import numpy as np
import pytest

from linefib.expr import VectorFieldSpec, evaluate_scalar
from linefib.gallery import example_gallery


def fd_jacobian(field: VectorFieldSpec, p, h: float = 1e-5) -> np.ndarray:
    """Central differences of the tree-walk scalar evaluator (independent of any dual-number code)."""

    def value(q):
        v = np.array([evaluate_scalar(c, q) for c in field.components])
        if field.normalize:
            v = v / np.linalg.norm(v)
        return v

    p = np.asarray(p, dtype=float)
    J = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        J[:, j] = (value(p + e) - value(p - e)) / (2 * h)
    return J


def fd_value(field: VectorFieldSpec, p) -> np.ndarray:
    v = np.array([evaluate_scalar(c, p) for c in field.components])
    return v / np.linalg.norm(v) if field.normalize else v


def rotation_matrix(axis, angle) -> np.ndarray:
    """Rodrigues' formula."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


FIXED_ROTATION = rotation_matrix((1.0, 2.0, 3.0), 0.7)


@pytest.fixture(scope="session")
def gallery():
    return {name: ex.spec() for name, ex in example_gallery().items()}


@pytest.fixture(scope="session")
def skew_hopf(gallery):
    return gallery["skew-hopf"]


@pytest.fixture(scope="session")
def theta_linear(gallery):
    return gallery["theta-linear"]


@pytest.fixture(scope="session")
def theta_cubic(gallery):
    return gallery["theta-cubic"]


@pytest.fixture(scope="session")
def constant_field(gallery):
    return gallery["constant"]


@pytest.fixture(scope="session")
def helix(gallery):
    return gallery["helix-not-straight"]


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)
