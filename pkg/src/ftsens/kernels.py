"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``FTSENS_PURE=1`` to force the fallback (used by the benchmark and tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

COMPILED = _core is not None and not os.environ.get("FTSENS_PURE")
_impl = _core if COMPILED else _fallback
BACKEND = "cython" if COMPILED else "numpy"


def rk4_advance(pts: np.ndarray, nsteps: int, h: float, p0: float, p1: float, alpha: float,
                *, backend=None) -> np.ndarray:
    """Advance cover coordinates ``pts`` (n, 2) by ``nsteps`` RK4 steps in place."""
    impl = _pick(backend)
    arr = np.ascontiguousarray(pts, dtype=np.float64)
    impl.rk4_advance(arr, int(nsteps), float(h), float(p0), float(p1), float(alpha))
    if arr is not pts:
        pts[...] = arr
    return pts


def greedy_separated(orbits: np.ndarray, delta: float, period: float = 1.0, *, backend=None) -> np.ndarray:
    """Indices of a greedy separated subset; ``orbits`` has shape (P, n+1, 2)."""
    impl = _pick(backend)
    arr = np.ascontiguousarray(orbits, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("orbits must have shape (P, T, 2)")
    return impl.greedy_separated(arr, float(delta), float(period))


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "cython":
        if _core is None:
            raise RuntimeError("compiled extension is not built")
        return _core
    if backend == "numpy":
        return _fallback
    raise ValueError(f"unknown backend {backend!r}")
