import numpy as np
import pytest

from mequilibrium import kernels

BACKENDS = kernels.available_backends()


def test_numpy_always_available():
    assert "numpy" in BACKENDS
    assert kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("backend", BACKENDS)
def test_lloyd_agrees_with_numpy(backend):
    rng = np.random.default_rng(0)
    pts = rng.dirichlet([1, 1, 1], size=300)
    init = pts[:5].copy()
    ref = kernels.lloyd(pts, init, 100, "numpy")
    got = kernels.lloyd(pts, init, 100, backend)
    assert np.allclose(ref[0], got[0], atol=1e-12)
    assert np.array_equal(np.asarray(ref[1]), np.asarray(got[1]))
    assert got[2] == pytest.approx(ref[2], rel=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_order_codes_agree(backend):
    rng = np.random.default_rng(1)
    vals = rng.integers(0, 4, size=(500, 3)).astype(float)   # many exact ties
    ref = kernels.order_codes(vals, 1e-9, "numpy")
    assert np.array_equal(ref, kernels.order_codes(vals, 1e-9, backend))


def test_code_round_trip():
    for order in [(0, 1, 2), (2, 0, 1), (1, 2, 0)]:
        assert kernels.ordering_from_code(kernels.code_from_ordering(order), 3) == order


def test_unknown_backend():
    with pytest.raises(Exception):
        kernels.lloyd(np.zeros((2, 2)), np.zeros((1, 2)), 10, "fortran")
