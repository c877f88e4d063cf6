"""The dynamical systems: shift on the Hilbert cube, linear torus maps, products
with a circle factor, and the time-1 map of a slowed irrational torus flow.

Every system exposes the same small surface used by the rest of the package:
``forward``, ``ball_image``, ``images`` (successive ball images), ``image_diam``,
``dist`` and ``set_forward`` for representable sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np

from . import kernels
from .errors import IntegratorDivergence, UnsupportedRadius
from .geometry import (HALF, BoxContinuum, Dyadic, HilbertPoint, TorusPoint, box_diam,
                       circle_dist, cover_sup_diam, hilbert_dist, torus_dist)

SQRT2_MINUS_1 = "sqrt2-1"
_SYMBOLIC = {SQRT2_MINUS_1: math.sqrt(2.0) - 1.0, "golden-1": (math.sqrt(5.0) - 1.0) / 2.0}


class Bounded(NamedTuple):
    """Two-sided diameter bound of a sampled image."""

    lower: float
    upper: float


# set images ----------------------------------------------------------------

@dataclass(frozen=True)
class TorusParallelotope:
    """Image ``M (center + [-r, r]^d)`` kept in the universal cover.

    ``center`` is the image of the ball centre (already reduced mod 1 when
    ``reduced`` is set); ``matrix`` is the integer matrix applied so far.
    """

    center: tuple
    matrix: tuple
    radius: object
    reduced: bool = True

    def offsets(self) -> list[tuple]:
        d = len(self.center)
        r = self.radius
        out = []
        for signs in _sign_vectors(d):
            out.append(tuple(sum(self.matrix[a][b] * signs[b] * r for b in range(d)) for a in range(d)))
        return out

    def vertices(self) -> list[tuple]:
        return [tuple(c + o for c, o in zip(self.center, off)) for off in self.offsets()]

    def sample(self, n_side: int = 8) -> np.ndarray:
        """Grid sample of the parallelotope in the cover, vertices included."""
        d = len(self.center)
        t = np.linspace(-1.0, 1.0, n_side)
        grid = np.stack(np.meshgrid(*([t] * d), indexing="ij"), axis=-1).reshape(-1, d)
        M = np.array(self.matrix, dtype=float)
        return np.array([float(c) for c in self.center]) + float(self.radius) * grid @ M.T


def _sign_vectors(d):
    if d == 0:
        return [()]
    return [s + (e,) for s in _sign_vectors(d - 1) for e in (-1, 1)]


@dataclass(frozen=True)
class PointCloud:
    """Samples of an image in the cover plus the sampling dispersion."""

    points: np.ndarray
    dispersion: float

    def __hash__(self):
        return id(self)


@dataclass(frozen=True)
class Arc:
    """Closed arc of the circle: centre ``offset + turns * alpha`` and half-width."""

    center: "CircleCoord"
    half_width: object


@dataclass(frozen=True)
class ProductImage:
    base: object
    arc: Arc


@dataclass(frozen=True)
class CircleCoord:
    """Circle coordinate ``offset + turns * alpha (mod 1)``; kept symbolic so
    distances between points rotated the same number of times stay exact."""

    offset: object
    turns: int = 0


# systems -------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftSystem:
    """Backward shift ``(sigma x)_i = x_{i+1}`` on ``[0,1]^Z``."""

    epsilon: Dyadic = Dyadic(1, -3)
    kind: str = field(default="Shift", init=False)
    exact = True
    diameter = Dyadic(1)
    ball_bound = None

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Dyadic.coerce(self.epsilon))
        if not 0 < self.epsilon < Fraction(1, 4):
            raise ValueError("the shift needs 0 < epsilon < 1/4")

    @property
    def id(self) -> str:
        return f"shift(eps={self.epsilon})"

    def config(self) -> dict:
        return {"kind": "shift", "epsilon": str(self.epsilon)}

    def forward(self, x: HilbertPoint, steps: int) -> HilbertPoint:
        return x.shifted(steps)

    def set_forward(self, C: BoxContinuum, steps: int) -> BoxContinuum:
        return C.shifted(steps)

    def ball_image(self, x: HilbertPoint, r, j: int) -> BoxContinuum:
        _check_ball(self, r, j)
        return BoxContinuum.ball_image(x, r, j)

    def images(self, x: HilbertPoint, r) -> Iterator[BoxContinuum]:
        _check_ball(self, r, 0)
        base = BoxContinuum.ball_image(x, r, 0)
        j = 0
        while True:
            yield base.shifted(j)
            j += 1

    def set_images(self, C: BoxContinuum) -> Iterator[BoxContinuum]:
        j = 0
        while True:
            yield C.shifted(j)
            j += 1

    def image_diam(self, img: BoxContinuum) -> Dyadic:
        return box_diam(img)

    def dist(self, x: HilbertPoint, y: HilbertPoint) -> Dyadic:
        return hilbert_dist(x, y)

    def backward_expansion_floor(self, n: int) -> Dyadic:
        """``c`` with ``diam(sigma^-k A) >= c diam(A)`` for ``0 <= k <= n``."""
        return Dyadic(1, -n)

    def k_gamma(self, gamma) -> int:
        """Integer k with ``eps/2^(k+1) <= gamma < eps/2^k``."""
        gamma = Fraction(Dyadic.coerce(gamma).to_fraction()) if not isinstance(gamma, Fraction) else gamma
        eps = self.epsilon.to_fraction()
        if not 0 < gamma <= eps:
            raise ValueError("gamma must lie in (0, eps]")
        k = 0
        while not eps / 2 ** (k + 1) <= gamma:
            k += 1
        return k

    def m_gamma(self, gamma) -> int:
        return self.k_gamma(gamma) + 2


@dataclass(frozen=True)
class TorusLinear:
    """Linear automorphism of T^2 induced by an integer unimodular matrix."""

    matrix: tuple = ((2, 1), (1, 1))
    kind: str = field(default="TorusLinear", init=False)
    exact = True
    diameter = Fraction(1, 2)
    ball_bound = Fraction(1, 4)

    def __post_init__(self):
        A = tuple(tuple(int(v) for v in row) for row in self.matrix)
        object.__setattr__(self, "matrix", A)
        if len(A) != 2 or any(len(row) != 2 for row in A):
            raise ValueError("matrix must be 2x2")
        det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
        if abs(det) != 1:
            raise ValueError("matrix must be unimodular")
        tr = A[0][0] + A[1][1]
        disc = tr * tr - 4 * det
        if disc <= 0 or max(abs((tr + math.sqrt(disc)) / 2), abs((tr - math.sqrt(disc)) / 2)) <= 1:
            raise ValueError("matrix must have a real eigenvalue of modulus > 1")

    @property
    def id(self) -> str:
        return f"torus{list(map(list, self.matrix))}"

    def config(self) -> dict:
        return {"kind": "torus-linear", "matrix": [list(r) for r in self.matrix]}

    @property
    def expansion(self) -> float:
        A = self.matrix
        tr = A[0][0] + A[1][1]
        det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
        return (abs(tr) + math.sqrt(tr * tr - 4 * det)) / 2

    @property
    def lambda1(self) -> float:
        return 1.0 / self.expansion

    lambda2 = lambda1

    def eigenvectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit (sup-norm) unstable and stable eigenvectors."""
        w, v = np.linalg.eig(np.array(self.matrix, dtype=float))
        order = np.argsort(-np.abs(w))
        u, s = v[:, order[0]], v[:, order[1]]
        return u / np.abs(u).max(), s / np.abs(s).max()

    def power(self, n: int) -> tuple:
        return _matpow(self.matrix, n)

    def forward(self, x, steps: int) -> TorusPoint:
        M = self.power(steps)
        return TorusPoint(tuple(sum(M[a][b] * x[b] for b in range(2)) for a in range(2)))

    def set_forward(self, P: TorusParallelotope, steps: int) -> TorusParallelotope:
        M = self.power(steps)
        center = self.forward(P.center, steps)
        mat = _matmul(M, P.matrix)
        return TorusParallelotope(tuple(center), mat, P.radius)

    def ball_image(self, x, r, j: int) -> TorusParallelotope:
        _check_ball(self, r, j)
        return TorusParallelotope(tuple(self.forward(x, j)), self.power(j), r)

    def images(self, x, r) -> Iterator[TorusParallelotope]:
        _check_ball(self, r, 0)
        j = 0
        while True:
            yield self.ball_image(x, r, j)
            j += 1

    def set_images(self, P: TorusParallelotope) -> Iterator[TorusParallelotope]:
        j = 0
        while True:
            yield self.set_forward(P, j)
            j += 1

    def image_diam(self, img: TorusParallelotope):
        return parallelotope_diam(img)

    def dist(self, x, y):
        return torus_dist(x, y)

    def backward_expansion_floor(self, n: int) -> float:
        Ainv = self.power(-1)
        norm = max(sum(abs(v) for v in row) for row in Ainv)
        return 1.0 / norm ** n

    def orbit_array(self, pts: np.ndarray, n: int) -> np.ndarray:
        """Float orbits ``(P, n+1, 2)`` of cover points, reduced mod 1."""
        out = np.empty((len(pts), n + 1, 2))
        cur = np.asarray(pts, dtype=float) % 1.0
        A = np.array(self.matrix, dtype=float)
        for k in range(n + 1):
            out[:, k] = cur
            cur = (cur @ A.T) % 1.0
        return out


def parallelotope_diam(img: TorusParallelotope):
    """Max pairwise vertex distance in the cover, saturated at 1/2."""
    verts = img.vertices()
    best = 0
    for a in range(len(verts)):
        for b in range(a + 1, len(verts)):
            d = max(abs(p - q) for p, q in zip(verts[a], verts[b]))
            if d > best:
                best = d
    half = Fraction(1, 2) if isinstance(best, (int, Fraction)) else 0.5
    return half if best > half else best


@dataclass(frozen=True)
class CircleMap:
    """Rotation by a symbolic irrational ``alpha``, or the identity."""

    alpha: str | None = SQRT2_MINUS_1

    @property
    def value(self) -> float:
        return 0.0 if self.alpha is None else _SYMBOLIC[self.alpha]

    def forward(self, c: CircleCoord, steps: int) -> CircleCoord:
        if self.alpha is None:
            return c
        return CircleCoord(c.offset, c.turns + steps)

    def dist(self, a: CircleCoord, b: CircleCoord):
        if a.turns == b.turns or self.alpha is None:
            return circle_dist(a.offset, b.offset)
        va = float(a.offset) + a.turns * self.value
        vb = float(b.offset) + b.turns * self.value
        return circle_dist(va, vb)

    def float_value(self, c: CircleCoord) -> float:
        return (float(c.offset) + c.turns * self.value) % 1.0


def arc_diam(arc: Arc):
    w = 2 * arc.half_width
    half = Dyadic(1, -1) if isinstance(w, Dyadic) else Fraction(1, 2)
    return half if w > half else w


@dataclass(frozen=True)
class ProductSystem:
    """``f x g`` with the sup product metric; ``g`` a circle rotation or the identity."""

    base: object
    circle: CircleMap = CircleMap()
    kind: str = field(default="Product", init=False)

    @property
    def exact(self) -> bool:
        return self.base.exact

    @property
    def id(self) -> str:
        return f"product({self.base.id}, {self.circle.alpha or 'id'})"

    @property
    def ball_bound(self):
        return self.base.ball_bound

    def config(self) -> dict:
        return {"kind": "product", "base": self.base.config(),
                "rotation_alpha": self.circle.alpha or "identity"}

    def forward(self, x, steps: int):
        b, c = x
        return (self.base.forward(b, steps), self.circle.forward(c, steps))

    def ball_image(self, x, r, j: int) -> ProductImage:
        b, c = x
        return ProductImage(self.base.ball_image(b, r, j), Arc(self.circle.forward(c, j), r))

    def images(self, x, r):
        b, c = x
        j = 0
        for img in self.base.images(b, r):
            yield ProductImage(img, Arc(self.circle.forward(c, j), r))
            j += 1

    def set_forward(self, img: ProductImage, steps: int) -> ProductImage:
        return ProductImage(self.base.set_forward(img.base, steps),
                            Arc(self.circle.forward(img.arc.center, steps), img.arc.half_width))

    def set_images(self, img: ProductImage):
        j = 0
        while True:
            yield self.set_forward(img, j)
            j += 1

    def image_diam(self, img: ProductImage):
        a = self.base.image_diam(img.base)
        b = arc_diam(img.arc)
        return a if a >= b else b

    def dist(self, x, y):
        a = self.base.dist(x[0], y[0])
        b = self.circle.dist(x[1], y[1])
        return a if a >= b else b

    def equicontinuity_radius(self, gamma):
        """Radius ``d`` such that arcs of radius ``d`` never exceed ``gamma``."""
        return gamma / 2


@dataclass(frozen=True)
class SlowedFlow:
    """Time-1 map of ``g F`` on T^2 with ``F = (1, alpha)`` and
    ``g(q) = sin^2(pi (q1 - p1)) + sin^2(pi (q2 - p2))``."""

    p: tuple = (0.0, 0.0)
    alpha: str = SQRT2_MINUS_1
    h: float = 1e-3
    samples: int = 512
    richardson_tol: float = 1e-9
    max_halvings: int = 6
    refine_gap: float = 1e-3
    max_points: int = 1 << 15
    kind: str = field(default="SlowedFlow", init=False)
    exact = False
    diameter = 0.5
    ball_bound = 0.25

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) % 1.0 for v in self.p))
        if self.alpha not in _SYMBOLIC:
            raise ValueError(f"unknown symbolic constant {self.alpha!r}")

    @property
    def id(self) -> str:
        return f"slowed-flow(p={self.p}, alpha={self.alpha}, h={self.h})"

    def config(self) -> dict:
        return {"kind": "slowed-flow", "p": list(self.p), "alpha": self.alpha, "h": self.h,
                "samples": self.samples, "refine_gap": self.refine_gap}

    @property
    def alpha_value(self) -> float:
        return _SYMBOLIC[self.alpha]

    @property
    def steps_per_unit(self) -> int:
        return max(1, round(1.0 / self.h))

    def g(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return np.sin(np.pi * (q[..., 0] - self.p[0])) ** 2 + np.sin(np.pi * (q[..., 1] - self.p[1])) ** 2

    def validate_speed(self, n_side: int = 128) -> float:
        """Minimum of g over a grid avoiding p; must be positive (unique zero)."""
        t = (np.arange(n_side) + 0.5) / n_side
        grid = np.stack(np.meshgrid(t, t, indexing="ij"), -1).reshape(-1, 2)
        grid = (grid + np.array(self.p)) % 1.0
        vals = self.g(grid)
        if float(self.g(np.array(self.p))) != 0.0 or vals.min() <= 0.0:
            raise ValueError("speed profile must vanish exactly at p only")
        return float(vals.min())

    def advance(self, pts: np.ndarray, units: float, h: float | None = None) -> np.ndarray:
        """Flow cover points for ``units`` time (negative = backward); returns a new array."""
        h = self.h if h is None else h
        n = int(round(abs(units) / h))
        out = np.array(pts, dtype=float, copy=True).reshape(-1, 2)
        if n:
            kernels.rk4_advance(out, n, math.copysign(h, units), self.p[0], self.p[1], self.alpha_value)
        return out

    def forward(self, x, steps: int) -> TorusPoint:
        return TorusPoint(tuple(_flow_point(self, tuple(float(v) for v in x), int(steps))))

    def ball_image(self, x, r, j: int) -> PointCloud:
        _check_ball(self, r, j)
        gen = self.images(x, r)
        for _ in range(j):
            next(gen)
        return next(gen)

    def images(self, x, r, samples: int | None = None):
        """Images of the boundary square; segments whose ends separate by more
        than ``refine_gap`` get midpoints flowed from time 0."""
        _check_ball(self, r, 0)
        n = samples or self.samples
        t = np.arange(n) / n
        pts = _square_boundary(x, float(r), t)
        j = 0
        while True:
            pts, t = self._refine(x, float(r), t, pts, j)
            yield PointCloud(pts.copy(), _dispersion(pts))
            pts = self.advance(pts, 1)
            j += 1

    def _refine(self, x, r, t, pts, j):
        while len(t) < self.max_points:
            nxt = np.roll(pts, -1, axis=0)
            gaps = np.abs(nxt - pts).max(axis=1)
            bad = np.nonzero(gaps > self.refine_gap)[0]
            if not len(bad):
                break
            bad = bad[: self.max_points - len(t)]
            t_next = np.append(t[1:], 1.0)
            mid = (t[bad] + t_next[bad]) / 2
            new = self.advance(_square_boundary(x, r, mid), j)
            t = np.concatenate([t, mid])
            pts = np.concatenate([pts, new])
            order = np.argsort(t, kind="stable")
            t, pts = t[order], pts[order]
        return pts, t

    def set_forward(self, cloud: PointCloud, steps: int) -> PointCloud:
        pts = self.advance(cloud.points, steps)
        return PointCloud(pts, _dispersion(pts))

    def set_images(self, cloud: PointCloud):
        pts = cloud.points
        while True:
            yield PointCloud(pts.copy(), _dispersion(pts))
            pts = self.advance(pts, 1)

    def image_diam(self, img: PointCloud) -> Bounded:
        lo = min(cover_sup_diam(img.points), 0.5)
        return Bounded(lo, min(lo + 2 * img.dispersion, 0.5))

    def dist(self, x, y) -> float:
        return torus_dist(x, y)

    def orbit_array(self, pts: np.ndarray, n: int) -> np.ndarray:
        out = np.empty((len(pts), n + 1, 2))
        cur = np.array(pts, dtype=float)
        for k in range(n + 1):
            out[:, k] = cur % 1.0
            if k < n:
                cur = self.advance(cur, 1)
        return out

    def stable_orbit_point(self, s: float) -> tuple:
        """Point ``p - s F`` on the stable orbit of p (it flows into p)."""
        return ((self.p[0] - s) % 1.0, (self.p[1] - s * self.alpha_value) % 1.0)


@lru_cache(maxsize=4096)
def _flow_point(sys: SlowedFlow, x: tuple, steps: int) -> tuple:
    """Time-``steps`` map with a step-halving Richardson check."""
    h = sys.h
    pts = np.array([x], dtype=float)
    for _ in range(sys.max_halvings + 1):
        a = sys.advance(pts, steps, h)
        b = sys.advance(pts, steps, h / 2)
        if np.abs(a - b).max() <= sys.richardson_tol * max(1, abs(steps)):
            return tuple(b[0] % 1.0)
        h /= 2
    raise IntegratorDivergence(f"step halving did not converge below h={h}")


def _square_boundary(x, r: float, t: np.ndarray) -> np.ndarray:
    """Points of the sup-metric square's boundary at perimeter fractions ``t``."""
    t = np.asarray(t, dtype=float) % 1.0
    side = np.minimum((4 * t).astype(int), 3)
    u = 2 * r * (4 * t - side) - r
    px = np.select([side == 0, side == 1, side == 2], [u, np.full_like(u, r), -u], np.full_like(u, -r))
    py = np.select([side == 0, side == 1, side == 2], [np.full_like(u, -r), u, np.full_like(u, r)], -u)
    return np.stack([px, py], 1) + np.array([float(x[0]), float(x[1])])


def _dispersion(pts: np.ndarray) -> float:
    """Largest sup-distance between consecutive boundary samples (closed loop).

    The image of a closed square is bounded by the image of its boundary, so
    its diameter lies within twice this gap of the sampled farthest pair as
    long as the map is close to affine on each gap."""
    if len(pts) < 2:
        return 0.0
    gaps = np.abs(np.diff(np.vstack([pts, pts[:1]]), axis=0)).max(axis=1)
    return float(gaps.max())


def _check_ball(sys, r, j):
    if j < 0:
        raise ValueError("j must be non-negative")
    if not r > 0:
        raise UnsupportedRadius("radius must be positive")
    if sys.ball_bound is not None and r >= sys.ball_bound:
        raise UnsupportedRadius(f"radius {r} not below the connected-ball bound {sys.ball_bound}")


def _matmul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def _matpow(A, n: int):
    if n < 0:
        det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
        A = ((A[1][1] * det, -A[0][1] * det), (-A[1][0] * det, A[0][0] * det))
        n = -n
    R = ((1, 0), (0, 1))
    while n:
        if n & 1:
            R = _matmul(R, A)
        A = _matmul(A, A)
        n >>= 1
    return R


# config round trip ----------------------------------------------------------

def system_from_config(cfg: dict):
    kind = cfg.get("kind")
    if kind == "shift":
        return ShiftSystem(Dyadic.coerce(cfg.get("epsilon", "1/8")))
    if kind in ("torus-linear", "cat"):
        return TorusLinear(tuple(map(tuple, cfg.get("matrix", ((2, 1), (1, 1))))))
    if kind == "product":
        alpha = cfg.get("rotation_alpha", SQRT2_MINUS_1)
        return ProductSystem(system_from_config(cfg["base"]),
                             CircleMap(None if alpha in (None, "identity") else alpha))
    if kind == "slowed-flow":
        return SlowedFlow(tuple(cfg.get("p", (0.0, 0.0))), cfg.get("alpha", SQRT2_MINUS_1),
                          float(cfg.get("h", 1e-3)), int(cfg.get("samples", 512)))
    raise ValueError(f"unknown system kind {kind!r}")


def cat_map() -> TorusLinear:
    return TorusLinear(((2, 1), (1, 1)))


def random_hilbert_point(rng: np.random.Generator, support: int = 8, bits: int = 16,
                         fill=HALF) -> HilbertPoint:
    """Random point with dyadic coordinates on ``|i| <= support``."""
    vals = rng.integers(0, 2 ** bits + 1, size=2 * support + 1)
    return HilbertPoint({i: Dyadic(int(v), -bits) for i, v in zip(range(-support, support + 1), vals)},
                        fill)
