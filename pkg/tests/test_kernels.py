import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftsens import kernels

needs_core = pytest.mark.skipif(kernels._core is None, reason="compiled extension not built")


def _sup_torus(a, b):
    d = np.abs(a - b) % 1.0
    return np.minimum(d, 1.0 - d).max()


@given(st.integers(0, 2 ** 31), st.integers(1, 120), st.integers(0, 4),
       st.floats(0.02, 0.3))
def test_greedy_is_separated_and_maximal(seed, P, n, delta):
    rng = np.random.default_rng(seed)
    orbits = rng.random((P, n + 1, 2))
    kept = kernels.greedy_separated(orbits, delta, backend="numpy")
    for i, a in enumerate(kept):
        for b in kept[i + 1:]:
            assert _sup_torus(orbits[a], orbits[b]) > delta
    chosen = set(kept.tolist())
    for p in range(P):
        if p not in chosen:
            # each rejected point is within delta of an earlier kept one
            assert any(_sup_torus(orbits[p], orbits[k]) <= delta for k in kept if k < p)


@needs_core
@given(st.integers(0, 2 ** 31), st.integers(1, 200), st.floats(0.01, 0.2))
def test_backends_agree_on_greedy(seed, P, delta):
    orbits = np.random.default_rng(seed).random((P, 4, 2))
    a = kernels.greedy_separated(orbits, delta, backend="numpy")
    b = kernels.greedy_separated(orbits, delta, backend="cython")
    assert np.array_equal(a, b)


@needs_core
def test_backends_agree_on_rk4():
    pts = np.random.default_rng(0).random((64, 2))
    a, b = pts.copy(), pts.copy()
    kernels.rk4_advance(a, 40, 0.05, 0.0, 0.0, 0.41421356, backend="numpy")
    kernels.rk4_advance(b, 40, 0.05, 0.0, 0.0, 0.41421356, backend="cython")
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_rk4_rest_point_is_fixed():
    pts = np.zeros((1, 2))
    kernels.rk4_advance(pts, 100, 0.05, 0.0, 0.0, 0.4, backend="numpy")
    assert np.all(pts == 0)


def test_rk4_forward_backward_round_trip():
    pts = np.array([[0.3, 0.7], [0.55, 0.2]])
    out = pts.copy()
    kernels.rk4_advance(out, 200, 0.01, 0.0, 0.0, 0.41421356)
    kernels.rk4_advance(out, 200, -0.01, 0.0, 0.0, 0.41421356)
    np.testing.assert_allclose(out, pts, atol=1e-8)


def test_bad_shapes_and_backends():
    with pytest.raises(ValueError):
        kernels.greedy_separated(np.zeros((3, 2)), 0.1)
    with pytest.raises(ValueError):
        kernels.greedy_separated(np.zeros((3, 1, 2)), 0.1, backend="fortran")


def test_pure_env_forces_fallback():
    env = dict(os.environ, FTSENS_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from ftsens import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
