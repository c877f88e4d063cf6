"""Torus points, the sup metric on T^n, and sampled Hausdorff distance."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree


class TorusPoint(tuple):
    """Coordinates reduced mod 1. Fractions stay exact, floats stay floats."""

    def __new__(cls, coords: Iterable):
        coords = tuple(coords)
        if not 1 <= len(coords) <= 3:
            raise ValueError("torus dimension must be 1, 2 or 3")
        return super().__new__(cls, (_mod1(c) for c in coords))

    @property
    def dim(self) -> int:
        return len(self)

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self])


def _mod1(c):
    if isinstance(c, (int, Fraction)):
        return Fraction(c) % 1
    c = float(c) % 1.0
    return 0.0 if c == 1.0 else c


def circle_dist(a, b):
    d = abs(a - b) % 1
    return min(d, 1 - d)


def torus_dist(x: Sequence, y: Sequence):
    """Sup over coordinates of the circle distance."""
    return max(circle_dist(a, b) for a, b in zip(x, y))


def cover_sup_diam(points: np.ndarray) -> float:
    """Farthest-pair sup distance of a point set given in the universal cover."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    # sup-norm diameter is the largest coordinate spread
    return float((pts.max(axis=0) - pts.min(axis=0)).max())


def wrap_delta(d: np.ndarray) -> np.ndarray:
    """Componentwise circle distance of coordinate differences."""
    d = np.abs(d) % 1.0
    return np.minimum(d, 1.0 - d)


def cloud_hausdorff(a: np.ndarray, b: np.ndarray, *, torus: bool = True) -> float:
    """Hausdorff distance between two finite clouds under the sup metric."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    box = 1.0 if torus else None
    if torus:
        # x % 1.0 rounds to 1.0 for tiny negative x
        a, b = a % 1.0, b % 1.0
        a[a >= 1.0] = 0.0
        b[b >= 1.0] = 0.0
    ta = cKDTree(a, boxsize=box)
    tb = cKDTree(b, boxsize=box)
    dab, _ = tb.query(a, p=np.inf)
    dba, _ = ta.query(b, p=np.inf)
    return float(max(dab.max(), dba.max()))
