import numpy as np
import pytest

from linefib import _accel, _kernels
from linefib.expr import evaluate_jets

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def _lines(rng, n):
    B = rng.uniform(-1, 1, size=(n, 3))
    D = rng.normal(size=(n, 3))
    D /= np.linalg.norm(D, axis=1)[:, None]
    # a few exact parallels and an axis-aligned direction
    D[1] = D[0]
    D[2] = -D[0]
    D[3] = (0.0, 0.0, 1.0)
    return B, D


@needs_numba
def test_pair_scan_backends_agree(rng):
    B, D = _lines(rng, 400)
    a = _kernels.pair_scan(B, D, use_numba=True)
    b = _kernels.pair_scan(B, D, use_numba=False)
    # t1, t2 are conditioned like 1 / sin^2(angle)
    w = np.sin(a[3]) ** 2
    assert np.abs((a[0] - b[0]) * w).max() < 1e-12
    assert np.abs((a[1] - b[1]) * w).max() < 1e-12
    assert np.allclose(a[2], b[2], rtol=0, atol=1e-12)
    assert np.allclose(a[3], b[3], rtol=0, atol=1e-12)
    assert np.array_equal(a[4], b[4])


def test_pair_scan_parallel_flags(rng):
    B, D = _lines(rng, 5)
    _, _, _, angle, par = _kernels.pair_scan(B, D, use_numba=False)
    assert par[0] and par[1]  # (0,1) and (0,2) in triu order
    assert angle[0] == 0.0 and angle[1] == pytest.approx(np.pi)


def test_pair_scan_chunking(rng):
    B, D = _lines(rng, 30)
    whole = _kernels._pair_scan_numpy(B, D)
    parts = _kernels._pair_scan_numpy(B, D, chunk=7)
    for x, y in zip(whole, parts):
        assert np.array_equal(x, y)


def test_pair_scan_small_inputs():
    out = _kernels.pair_scan(np.zeros((1, 3)), np.array([[1.0, 0, 0]]), use_numba=False)
    assert all(len(a) == 0 for a in out)


@pytest.mark.parametrize("use_numba", [False, pytest.param(True, marks=needs_numba)])
def test_clip_examples(use_numba):
    B = np.array([[0.0, 0, 0], [0, 0, 0], [2, 0, 0], [0, 0, 0]])
    D = np.array([[1.0, 0, 0], [0.6, 0.8, 0], [0, 1, 0], [0, 0, -1]])
    out = _kernels.clip_to_box(B, D, (-1, -1, -1), (1, 1, 1), use_numba=use_numba)
    assert np.allclose(out[0], [-1, 1])
    assert np.allclose(out[1], [-1.25, 1.25])
    assert out[2, 0] > out[2, 1]  # misses the box
    assert np.allclose(out[3], [-1, 1])


@needs_numba
def test_clip_backends_agree(rng):
    B, D = _lines(rng, 50)
    a = _kernels.clip_to_box(B, D, (-1, -2, -1), (1, 1, 3), use_numba=True)
    b = _kernels.clip_to_box(B, D, (-1, -2, -1), (1, 1, 3), use_numba=False)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13)


@needs_numba
@pytest.mark.parametrize("name", ["skew-hopf", "theta-cubic", "helix-not-straight"])
def test_field_backends_agree(gallery, name, rng):
    from linefib.expr.compile import CompiledField

    spec = gallery[name]
    pts = rng.uniform(-1, 1, size=(50, 3))
    a = CompiledField(spec.components, spec.normalize, use_numba=True).jet_batch(pts)
    b = CompiledField(spec.components, spec.normalize, use_numba=False).jet_batch(pts)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-12, atol=1e-13, equal_nan=True)
    jets = evaluate_jets(spec, pts)
    assert np.all(jets.status == 0)


def test_backend_name():
    assert _accel.backend_name() in ("numba", "numpy")
