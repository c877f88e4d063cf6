"""Hyperbolic ft-metric on catalogs of marked continua, and entropy estimates.

Values of ``rho`` live in ``Q(mu)`` with ``mu = 2**(-1/m)``; :class:`LambdaPoly`
keeps them exact so sums of chain costs and the sandwich comparisons are
decided without rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import networkx as nx
import numpy as np
from scipy.stats import qmc

from . import kernels
from .continua import shift_fu_closed_form
from .errors import IncompatibleRepresentation, NoChain, SplitFailed
from .firsttime import continuum_first_increase
from .geometry import (BoxContinuum, Dyadic, HilbertPoint, box_contains_point, box_diam, box_hull,
                       box_subset, boxes_intersect, hausdorff_box, widest_coordinate)
from .serialize import csv_text, dumps

MAX_PATHS = 20_000


# exact powers of 2^(-1/m) ---------------------------------------------------

def _frac(v) -> Fraction:
    if isinstance(v, Dyadic):
        return v.to_fraction()
    return Fraction(v)


def _iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a non-negative integer."""
    if n < 2:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


class LambdaPoly:
    """``sum c_j mu**j`` for j < m, where ``mu = 2**(-1/m)`` and ``mu**m = 1/2``."""

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs):
        if m < 1:
            raise ValueError("m must be positive")
        cs = [Fraction(c) for c in coeffs][:m]
        cs += [Fraction(0)] * (m - len(cs))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("LambdaPoly is immutable")

    @classmethod
    def power(cls, n: int, m: int) -> LambdaPoly:
        q, r = divmod(n, m)
        cs = [0] * m
        cs[r] = Fraction(1, 2) ** q if q >= 0 else Fraction(2) ** -q
        return cls(m, cs)

    @classmethod
    def const(cls, v, m: int) -> LambdaPoly:
        return cls(m, [_frac(v)])

    def _lift(self, other) -> LambdaPoly:
        if isinstance(other, LambdaPoly):
            if other.m != self.m:
                raise ValueError("values built from different m")
            return other
        if isinstance(other, (int, Fraction, Dyadic)):
            return LambdaPoly.const(other, self.m)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return LambdaPoly(self.m, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return LambdaPoly(self.m, [-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        m = self.m
        out = [Fraction(0)] * m
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(o.coeffs):
                if b:
                    e = i + j
                    out[e % m] += a * b / 2 ** (e // m)
        return LambdaPoly(m, out)

    __rmul__ = __mul__

    def sign(self) -> int:
        """Exact sign; ``x**m - 2`` is irreducible, so zero means all coefficients vanish."""
        if not any(self.coeffs):
            return 0
        m, P = self.m, 32
        while True:
            a = _iroot(1 << (P * m - 1), m)
            lo, hi = Fraction(a, 1 << P), Fraction(a + 1, 1 << P)
            s_lo = s_hi = Fraction(0)
            for j, c in enumerate(self.coeffs):
                if c > 0:
                    s_lo += c * lo ** j
                    s_hi += c * hi ** j
                elif c < 0:
                    s_lo += c * hi ** j
                    s_hi += c * lo ** j
            if s_lo > 0:
                return 1
            if s_hi < 0:
                return -1
            P *= 2

    def _cmp(self, other) -> int:
        o = self._lift(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare with {type(other).__name__}")
        return (self - o).sign()

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((self.m, self.coeffs))

    def __float__(self):
        mu = 2.0 ** (-1.0 / self.m)
        return float(sum(float(c) * mu ** j for j, c in enumerate(self.coeffs)))

    def __str__(self):
        terms = []
        for j, c in enumerate(self.coeffs):
            if not c:
                continue
            e = Fraction(-j, self.m)
            if c > 0 and (c.numerator & (c.numerator - 1)) == 0 and \
                    (c.denominator & (c.denominator - 1)) == 0:
                two = Fraction(c.numerator.bit_length() - c.denominator.bit_length())
                terms.append(f"2^({two + e})" if two + e else "1")
            elif e:
                terms.append(f"{c}*2^({e})")
            else:
                terms.append(str(c))
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return f"LambdaPoly(m={self.m}, {self})"


def lambda_m(sys, epsilon, schedule: dict | None = None) -> int:
    """``m = m_{eps/2}``: looked up in a monotone schedule when given, otherwise
    the system's own constant."""
    half = _frac(epsilon) / 2
    if schedule is not None:
        from .certifier import mgamma_at
        return mgamma_at(schedule, half, epsilon)
    return sys.m_gamma(Dyadic.from_fraction(half) if isinstance(epsilon, Dyadic) else half)


def rho(sys, C, epsilon, m: int) -> LambdaPoly:
    """``lambda**n1(C, eps)`` with ``lambda = 2**(-1/m)``."""
    return LambdaPoly.power(continuum_first_increase(sys, C, epsilon).n1, m)


@dataclass(frozen=True)
class MarkedContinuum:
    continuum: object
    p: object
    q: object
    n1_eps: int
    rho: LambdaPoly
    epsilon: object = None
    m: int = 2


def mark(sys, C, p, q, epsilon, m: int) -> MarkedContinuum:
    if isinstance(C, BoxContinuum):
        for name, pt in (("p", p), ("q", q)):
            if not box_contains_point(C, pt):
                raise ValueError(f"{name} is not a point of the continuum")
    n1 = continuum_first_increase(sys, C, epsilon).n1
    return MarkedContinuum(C, p, q, n1, LambdaPoly.power(n1, m), epsilon, m)


# catalog chains --------------------------------------------------------------

@dataclass
class ChainMetricResult:
    D_value: LambdaPoly
    witness: list            # catalog indices, in chain order
    links: list              # p, intermediate linking points, q
    rho_of_whole: LambdaPoly
    paths_examined: int
    exhaustive: bool         # False when the path cap stopped the search
    catalog_size: int
    catalog_restricted: bool = True

    @property
    def sandwich_ok(self) -> bool:
        return self.D_value <= self.rho_of_whole <= 4 * self.D_value

    def to_dict(self) -> dict:
        return {"D": str(self.D_value), "D_float": float(self.D_value),
                "rho": str(self.rho_of_whole), "rho_float": float(self.rho_of_whole),
                "witness": self.witness, "links": self.links,
                "sandwich_ok": self.sandwich_ok, "paths_examined": self.paths_examined,
                "exhaustive": self.exhaustive, "catalog_size": self.catalog_size,
                "catalog_restricted": self.catalog_restricted,
                "note": "minimum over catalog chains only; an upper bound on the infimum"}


def _continuum(c):
    return c.continuum if isinstance(c, MarkedContinuum) else c


def linking_point(A: BoxContinuum, B: BoxContinuum) -> HilbertPoint:
    """A point of ``A & B`` (midpoints of the coordinate overlaps)."""
    if A.fill != B.fill:
        raise IncompatibleRepresentation("boxes with different fills")
    sup = {}
    for i in set(A.window_map) | set(B.window_map):
        (a0, a1), (b0, b1) = A.interval(i), B.interval(i)
        lo, hi = max(a0, b0), min(a1, b1)
        if lo > hi:
            raise ValueError(f"boxes are disjoint at coordinate {i}")
        sup[i] = (lo + hi).ldexp(-1)
    return HilbertPoint(sup, A.fill)


class _Catalog:
    """Per-catalog caches: first increasing times, intersection graph, hull checks."""

    def __init__(self, sys, boxes, target, epsilon, m):
        self.sys, self.boxes, self.target = sys, boxes, target
        self.epsilon, self.m = epsilon, m
        for i, B in enumerate(boxes):
            if not box_subset(B, target):
                raise ValueError(f"catalog element {i} is not contained in the target")
        self.n1 = [continuum_first_increase(sys, B, epsilon).n1 for B in boxes]
        self.rho = [LambdaPoly.power(n, m) for n in self.n1]
        self.n1_target = continuum_first_increase(sys, target, epsilon).n1
        self.edges = [(i, j) for i, j in combinations(range(len(boxes)), 2)
                      if boxes_intersect(boxes[i], boxes[j])]
        self._cover = {}

    def covers(self, path) -> bool:
        """The chain's hull reaches the target's first increasing time; the hull
        has the same forward diameters as the union."""
        key = frozenset(path)
        if key not in self._cover:
            H = box_hull([self.boxes[i] for i in key])
            n1 = continuum_first_increase(self.sys, H, self.epsilon, budget=self.n1_target + 1).n1 \
                if self.n1_target >= 0 else -1
            self._cover[key] = n1 == self.n1_target
        return self._cover[key]

    def graph(self, p, q) -> nx.DiGraph:
        G = nx.DiGraph()
        w = [float(r) for r in self.rho]
        for i, j in self.edges:
            G.add_edge(i, j, w=w[j])
            G.add_edge(j, i, w=w[i])
        for i, B in enumerate(self.boxes):
            G.add_node(i)
            if box_contains_point(B, p):
                G.add_edge("p", i, w=w[i])
            if box_contains_point(B, q):
                G.add_edge(i, "q", w=0.0)
        return G

    def cost(self, path) -> LambdaPoly:
        return sum((self.rho[i] for i in path), LambdaPoly(self.m, []))


def _check_marks(target, p, q):
    for name, pt in (("p", p), ("q", q)):
        if not box_contains_point(target, pt):
            raise ValueError(f"{name} is not a point of the target")


def _result(cat: _Catalog, path, p, q, examined, exhaustive) -> ChainMetricResult:
    boxes = [cat.boxes[i] for i in path]
    links = [p] + [linking_point(a, b) for a, b in zip(boxes, boxes[1:])] + [q]
    return ChainMetricResult(cat.cost(path), list(path), links,
                             LambdaPoly.power(cat.n1_target, cat.m), examined, exhaustive,
                             len(cat.boxes))


def chain_D(sys, catalog, target, p, q, epsilon, m: int, max_paths: int = MAX_PATHS,
            _cat: _Catalog | None = None) -> ChainMetricResult:
    """Cheapest catalog chain from p to q whose union covers the target.

    Candidate paths come out of Yen's algorithm in order of float cost; the
    winner is compared exactly, and the search stops once the float cost
    passes the best covering chain.
    """
    _check_marks(target, p, q)
    cat = _cat or _Catalog(sys, [_continuum(c) for c in catalog], target, epsilon, m)
    G = cat.graph(p, q)
    if "p" not in G or "q" not in G or not nx.has_path(G, "p", "q"):
        raise NoChain("p and q are not connected through the catalog")
    best, best_f, examined, exhaustive = None, math.inf, 0, True
    for path in nx.shortest_simple_paths(G, "p", "q", weight="w"):
        inner = path[1:-1]
        f = sum(float(cat.rho[i]) for i in inner)
        if f > best_f * (1 + 1e-9):
            break
        examined += 1
        if cat.covers(inner):
            c = cat.cost(inner)
            if best is None or c < cat.cost(best):
                best, best_f = inner, f
        if examined >= max_paths:
            exhaustive = False
            break
    if best is None:
        raise NoChain(f"no covering chain among {examined} candidate paths")
    return _result(cat, best, p, q, examined, exhaustive)


def chain_D_exhaustive(sys, catalog, target, p, q, epsilon, m: int) -> ChainMetricResult:
    """Reference minimum over every simple path; only for small catalogs."""
    _check_marks(target, p, q)
    cat = _Catalog(sys, [_continuum(c) for c in catalog], target, epsilon, m)
    G = cat.graph(p, q)
    best, examined = None, 0
    if "p" in G and "q" in G:
        for path in nx.all_simple_paths(G, "p", "q"):
            examined += 1
            inner = path[1:-1]
            if cat.covers(inner) and (best is None or cat.cost(inner) < cat.cost(best)):
                best = inner
    if best is None:
        raise NoChain("no covering chain in the catalog")
    return _result(cat, best, p, q, examined, True)


@dataclass
class SandwichReport:
    result: ChainMetricResult
    refinements: int

    @property
    def ok(self) -> bool:
        return self.result.sandwich_ok

    def to_dict(self) -> dict:
        return {**self.result.to_dict(), "refinements": self.refinements, "ok": self.ok}


def verify_sandwich(sys, catalog, target, p, q, epsilon, m: int,
                    max_paths: int = MAX_PATHS) -> SandwichReport:
    """``D <= rho <= 4 D``; if the restricted minimum misses, the catalog is
    refined by adding the target itself (the one-element decomposition)."""
    boxes = [_continuum(c) for c in catalog]
    try:
        res = chain_D(sys, boxes, target, p, q, epsilon, m, max_paths)
        if res.sandwich_ok:
            return SandwichReport(res, 0)
    except NoChain:
        pass
    res = chain_D(sys, boxes + [target], target, p, q, epsilon, m, max_paths)
    return SandwichReport(res, 1)


@dataclass
class HyperbolicReport:
    n_values: list
    D_values: list
    bounds: list
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"n": self.n_values, "D": [str(d) for d in self.D_values],
                "bound": [str(b) for b in self.bounds], "failures": self.failures, "ok": self.ok}


def verify_hyperbolic(sys, mc: MarkedContinuum, catalog, n_max: int,
                      max_paths: int = MAX_PATHS) -> HyperbolicReport:
    """``D(f^-n C) <= 4 lambda^n D(C)`` on backward-iterated catalogs, n <= n_max."""
    boxes = [_continuum(c) for c in catalog]
    eps, m = mc.epsilon, mc.m
    D0 = chain_D(sys, boxes, mc.continuum, mc.p, mc.q, eps, m, max_paths).D_value
    rep = HyperbolicReport([], [], [], [])
    for n in range(n_max + 1):
        back = [sys.set_forward(B, -n) for B in boxes]
        Dn = chain_D(sys, back, sys.set_forward(mc.continuum, -n), sys.forward(mc.p, -n),
                     sys.forward(mc.q, -n), eps, m, max_paths).D_value
        bound = 4 * LambdaPoly.power(n, m) * D0
        rep.n_values.append(n)
        rep.D_values.append(Dn)
        rep.bounds.append(bound)
        if not Dn <= bound:
            rep.failures.append(n)
    return rep


@dataclass
class ChainLemmaReport:
    lhs: LambdaPoly
    rhs: LambdaPoly

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def margin(self) -> float:
        return float(self.rhs - self.lhs)

    def to_dict(self) -> dict:
        return {"lhs": str(self.lhs), "rhs": str(self.rhs), "margin": self.margin, "ok": self.ok}


def chain_lemma_check(sys, chain, epsilon, m: int) -> ChainLemmaReport:
    """Both sides of ``rho(U C_i) <= 2 rho(C_1) + 4 rho(C_2) + ... + 2 rho(C_n)``;
    the union is evaluated on the coordinatewise hull, which has the same
    forward diameters."""
    chain = [_continuum(c) for c in chain]
    if not chain:
        raise ValueError("empty chain")
    for i, (a, b) in enumerate(zip(chain, chain[1:])):
        if not boxes_intersect(a, b):
            raise ValueError(f"chain elements {i} and {i + 1} do not intersect")
    n = len(chain)
    weights = [2] if n == 1 else [2] + [4] * (n - 2) + [2]
    rhs = sum((w * rho(sys, C, epsilon, m) for w, C in zip(weights, chain)), LambdaPoly(m, []))
    lhs = rho(sys, box_hull(chain), epsilon, m)
    return ChainLemmaReport(lhs, rhs)


@dataclass
class TriangleReport:
    D_union: LambdaPoly
    D_left: LambdaPoly
    D_right: LambdaPoly

    @property
    def ok(self) -> bool:
        return self.D_union <= self.D_left + self.D_right


def triangle_check(sys, catalog, A, B, a, b, c, epsilon, m: int) -> TriangleReport:
    """``D([A u B]_(a,c)) <= D(A_(a,b)) + D(B_(b,c))``, each side over the catalog
    elements inside its continuum, with the union represented by its hull."""
    boxes = [_continuum(x) for x in catalog]
    U = box_hull([A, B])

    def D(target, s, t):
        sub = [x for x in boxes if box_subset(x, target)]
        return chain_D(sys, sub, target, s, t, epsilon, m).D_value

    return TriangleReport(D(U, a, c), D(A, a, b), D(B, b, c))


@dataclass
class CompatibilityRow:
    delta: object
    gamma_diam: object      # diam < gamma_diam  =>  rho < delta
    gamma_rho: LambdaPoly   # rho < gamma_rho    =>  diam < delta
    checked: int
    failures: list


def compatibility_check(sys, boxes, deltas, epsilon, m: int) -> list[CompatibilityRow]:
    """Both compatibility implications between ``rho`` and the diameter on the
    shift, with ``gamma = lambda**(2 m_delta)`` for the second."""
    if not hasattr(sys, "k_gamma"):
        raise IncompatibleRepresentation("compatibility constants are available for the shift only")
    eps = Dyadic.coerce(epsilon)
    boxes = [_continuum(c) for c in boxes]
    data = [(box_diam(B), rho(sys, B, eps, m)) for B in boxes]
    rows = []
    for delta in deltas:
        d = Dyadic.coerce(delta)
        # lambda^n < delta, then diam < eps 2^-n keeps |i| <= n iterates below eps
        n = 0
        while not LambdaPoly.power(n, m) < d:
            n += 1
        g_diam = eps.ldexp(-n)
        g_rho = LambdaPoly.power(2 * sys.m_gamma(d), m)
        fails = []
        for idx, (dm, r) in enumerate(data):
            if dm < g_diam and not r < d:
                fails.append((idx, "diam->rho"))
            if r < g_rho and not dm < d:
                fails.append((idx, "rho->diam"))
        rows.append(CompatibilityRow(d, g_diam, g_rho, len(data), fails))
    return rows


# catalogs --------------------------------------------------------------------

def random_catalog(sys, rng: np.random.Generator, x: HilbertPoint, k: int, size: int = 50,
                   extra_k: tuple = (1, 2), spread: tuple | None = None,
                   include_target: bool = True):
    """Target ``C = closed form (x, k)`` and sub-boxes ``closed form (x', k')``
    with ``k' - k`` drawn from ``extra_k`` and ``x'`` moved inside ``C`` on the
    coordinates ``spread``. Returns ``(target, boxes, p, q)``."""
    eps = sys.epsilon
    target = shift_fu_closed_form(x, k, eps)
    lo, hi = spread if spread is not None else (k - 1, k + 3)
    boxes = [target] if include_target else []
    while len(boxes) < size:
        kk = k + int(rng.choice(extra_k))
        moves = {}
        for i in range(lo, hi + 1):
            slack = eps.ldexp(i - k) - eps.ldexp(i - kk)
            u = Dyadic(int(rng.integers(-256, 257)), -8)
            moves[i] = min(max(x[i] + slack * u, Dyadic(0)), Dyadic(1))
        B = shift_fu_closed_form(x.with_coords(moves), kk, eps)
        if box_subset(B, target):
            boxes.append(B)
    subs = boxes[1:] if include_target else boxes
    a, b = rng.choice(len(subs), size=2, replace=False)
    return target, boxes, subs[a].center(), subs[b].center()


def random_chain(sys, rng: np.random.Generator, length: int, k_range=(2, 5), support: int = 6):
    """Closed-form boxes, each centred at a point of its predecessor."""
    eps = sys.epsilon
    x = HilbertPoint({i: Dyadic(int(v), -10) for i, v in
                      zip(range(-support, support + 1), rng.integers(0, 1025, 2 * support + 1))})
    chain = []
    for _ in range(length):
        k = int(rng.integers(k_range[0], k_range[1] + 1))
        B = shift_fu_closed_form(x, k, eps)
        chain.append(B)
        moves = {}
        for i in range(-support, support + 1):
            lo, hi = B.interval(i)
            u = Dyadic(int(rng.integers(0, 257)), -8)
            moves[i] = lo + (hi - lo) * u
        x = x.with_coords(moves)
    return chain


# separated sets and entropy ------------------------------------------------

@dataclass
class SeparatedSetResult:
    n: int
    delta: object
    points: list
    count: int
    h: float | None = None
    window: tuple | None = None

    def to_dict(self) -> dict:
        return {"n": self.n, "delta": self.delta, "count": self.count, "h": self.h,
                "window": list(self.window) if self.window else None}


def torus_pool(size: int, seed: int | None = None) -> np.ndarray:
    """Scrambled Halton points in the unit square."""
    return qmc.Halton(d=2, scramble=True, seed=seed).random(size)


def square_pool(center, side: float, size: int, seed: int | None = None) -> np.ndarray:
    """Scrambled Halton points in a small square; growth of separated sets
    inside one square is the entropy rate without saturating the pool."""
    c = np.asarray(center, dtype=float)
    return (c - side / 2 + side * torus_pool(size, seed)) % 1.0


def shift_bowen_dist(a: HilbertPoint, b: HilbertPoint, n: int) -> Dyadic:
    """``max_{0<=t<=n} d(sigma^t a, sigma^t b)`` in closed form: coordinate j is
    best seen at the iterate nearest to it, with weight ``2**-dist(j, [0, n])``."""
    best = Dyadic(0)
    for j in set(a.support) | set(b.support):
        w = -j if j < 0 else max(0, j - n)
        best = max(best, abs(a[j] - b[j]).ldexp(-w))
    if a.fill != b.fill:
        best = max(best, abs(a.fill - b.fill))
    return best


def _greedy_generic(sys, n, delta, candidates):
    if hasattr(sys, "k_gamma"):
        def far(x, y):
            return shift_bowen_dist(x, y, n) > delta
    else:
        def far(x, y):
            return any(sys.dist(sys.forward(x, k), sys.forward(y, k)) > delta for k in range(n + 1))
    kept = []
    for x in candidates:
        if all(far(x, y) for y in kept):
            kept.append(x)
    return kept


def separated_set(sys, n: int, delta, candidates, orbits: np.ndarray | None = None) -> SeparatedSetResult:
    """Greedy maximal (n, delta)-separated subset of the candidates; its size is
    a lower bound for ``s(n, delta)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if hasattr(sys, "orbit_array"):
        pts = np.asarray(candidates, dtype=float)
        if orbits is None:
            orbits = sys.orbit_array(pts, n)
        idx = kernels.greedy_separated(orbits[:, :n + 1], float(delta))
        kept = pts[idx]
        return SeparatedSetResult(n, delta, kept, len(kept))
    kept = _greedy_generic(sys, n, delta, list(candidates))
    return SeparatedSetResult(n, delta, kept, len(kept))


@dataclass
class EntropyResult:
    delta: object
    n_values: list
    counts: list
    h: float
    residual: float
    window: tuple
    pool_size: int
    backend: str

    def to_dict(self) -> dict:
        return {"delta": self.delta, "n": self.n_values, "s": self.counts, "h": self.h,
                "fit_residual": self.residual, "fit_window": list(self.window),
                "pool_size": self.pool_size, "backend": self.backend,
                "note": "greedy counts are lower bounds on s(n, delta)"}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        return csv_text(["n", "s", "log_s"],
                        [(n, s, math.log(s)) for n, s in zip(self.n_values, self.counts)])


def entropy_estimate(sys, delta, n_max: int, pool) -> EntropyResult:
    """Least-squares slope of ``log s(n, delta)`` over the upper half of ``n <= n_max``."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    orbits = None
    if hasattr(sys, "orbit_array"):
        pool = np.asarray(pool, dtype=float)
        orbits = sys.orbit_array(pool, n_max)
    else:
        pool = list(pool)
    counts = [separated_set(sys, n, delta, pool, orbits).count for n in range(n_max + 1)]
    lo = (n_max + 1) // 2
    ns = np.arange(lo, n_max + 1)
    ys = np.log(np.array(counts[lo:], dtype=float))
    if len(ns) < 2:
        h, res = float(ys[-1] / max(n_max, 1)), 0.0
    else:
        coef = np.polyfit(ns, ys, 1)
        h = float(coef[0])
        res = float(np.sqrt(np.mean((np.polyval(coef, ns) - ys) ** 2)))
    return EntropyResult(delta, list(range(n_max + 1)), counts, h, res, (lo, n_max), len(pool),
                         kernels.BACKEND if orbits is not None else "exact")


# split tree ----------------------------------------------------------------

@dataclass(frozen=True)
class SplitConstants:
    M: int
    k_node: int
    alpha: LambdaPoly
    m: int
    m_small: int      # m_{delta/6}


def split_constants(sys, delta, m: int | None = None) -> SplitConstants:
    """Smallest M >= 2 m_{delta/6} with ``4 lambda^M / (1 - lambda^M) < alpha``,
    where ``alpha = lambda^(2 m_{delta/6}) / 4`` makes ``D < alpha`` force
    ``diam < delta/6``."""
    eps = sys.epsilon
    d = Dyadic.coerce(delta)
    if not 0 < d <= eps:
        raise ValueError("delta must lie in (0, eps]")
    if m is None:
        m = lambda_m(sys, eps)
    sixth = d.to_fraction() / 6
    m_small = sys.m_gamma(sixth)
    k_node = m_small
    while shift_node_diam(eps, k_node) > sixth:
        k_node += 1
    a = 2 * m_small
    alpha = LambdaPoly.power(a, m) * Fraction(1, 4)
    M = a
    if 2 * d <= eps:
        M = max(M, sys.m_gamma(2 * d))
    # 4 mu^M < alpha (1 - mu^M)
    while not 4 * LambdaPoly.power(M, m) < alpha * (1 - LambdaPoly.power(M, m)):
        M += 1
    return SplitConstants(M, k_node, alpha, m, m_small)


def shift_node_diam(eps, k: int) -> Fraction:
    """Diameter bound ``2 eps 2^-k`` of a closed-form box (clipping only shrinks it)."""
    return Dyadic.coerce(eps).to_fraction() * 2 / 2 ** k


@dataclass
class SplitNode:
    path: str
    box: BoxContinuum
    point: HilbertPoint       # split point in box & f^M(parent box)


@dataclass
class SplitTreeResult:
    M: int
    delta: object
    depth: int
    points: list
    nodes: list = field(repr=False, default_factory=list)
    separated: bool = False
    min_bowen: Dyadic | None = None
    chain_max: Dyadic | None = None
    chain_ok: bool = False
    hausdorff_min: Dyadic | None = None

    @property
    def entropy_bound(self) -> float:
        return math.log(2) / self.M

    @property
    def ok(self) -> bool:
        return self.separated and self.chain_ok

    def to_dict(self, window: int = 8) -> dict:
        def trunc(x):
            return {"coords": {str(i): str(x[i]) for i in range(-window, window + 1)},
                    "fill": str(x.fill)}
        return {"M": self.M, "delta": self.delta, "depth": self.depth,
                "points": len(self.points), "separated": self.separated,
                "min_bowen_distance": self.min_bowen, "chain_max_diam": self.chain_max,
                "chain_ok": self.chain_ok, "sibling_hausdorff_min": self.hausdorff_min,
                "entropy_lower_bound": self.entropy_bound, "separation_time": self.depth * self.M,
                "window": window,
                "tree": [{"path": nd.path, "point": trunc(nd.point)} for nd in self.nodes]}


def _split(img: BoxContinuum, level: int, delta: Dyadic):
    d = box_diam(img)
    if d < delta:
        raise SplitFailed(level, f"image diameter {d} < delta {delta}")
    c = widest_coordinate(img)
    lo, hi = img.interval(c)
    z = img.center()
    return z.with_coords({c: lo}), z.with_coords({c: hi})


def split_tree(sys, C0: BoxContinuum, M: int, delta, depth: int, anchor: HilbertPoint | None = None,
               k_node: int | None = None, check_chain: bool = True) -> SplitTreeResult:
    """Binary tree of closed-form boxes split ``delta`` apart after M steps; the
    ``2**depth`` leaves pulled back ``depth*M`` steps are checked pairwise
    ``(depth*M, delta/3)``-separated in exact arithmetic."""
    if not hasattr(sys, "k_gamma"):
        raise IncompatibleRepresentation("split_tree builds shift boxes")
    d = Dyadic.coerce(delta)
    eps = sys.epsilon
    if k_node is None:
        k_node = split_constants(sys, d).k_node
    if anchor is None:
        anchor = C0.center()
    if depth == 0:
        return SplitTreeResult(M, d, 0, [anchor], [SplitNode("", C0, anchor)], True, None,
                               Dyadic(0), True)
    levels = [[SplitNode("", C0, anchor)]]
    haus = None
    for level in range(1, depth + 1):
        nxt = []
        for nd in levels[-1]:
            z0, z1 = _split(sys.set_forward(nd.box, M), level, d)
            b0, b1 = shift_fu_closed_form(z0, k_node, eps), shift_fu_closed_form(z1, k_node, eps)
            h = hausdorff_box(b0, b1)
            if 3 * h.to_fraction() < d.to_fraction():
                raise SplitFailed(level, f"siblings only {h} apart")
            haus = h if haus is None else min(haus, h)
            nxt += [SplitNode(nd.path + "0", b0, z0), SplitNode(nd.path + "1", b1, z1)]
        levels.append(nxt)
    leaves = levels[-1]
    T = depth * M
    points = [sys.forward(nd.point, -T) for nd in leaves]
    sep, dmin = bowen_separated(points, T, d.to_fraction() / 3)
    res = SplitTreeResult(M, d, depth, points, [nd for lv in levels for nd in lv], sep, dmin,
                          hausdorff_min=haus)
    if check_chain:
        res.chain_max = chain_diameters(sys, levels, M)
        res.chain_ok = 3 * res.chain_max.to_fraction() < d.to_fraction()
    return res


def chain_diameters(sys, levels, M: int) -> Dyadic:
    """Largest ``diam(C_v u f^-M C_child u f^-2M C_grandchild ...)`` over all
    nodes below the root and all descending paths, via hulls built upward."""
    hulls = [[nd.box] for nd in levels[-1]]
    worst = max(box_diam(hs[0]) for hs in hulls)
    for lv in range(len(levels) - 2, 0, -1):
        hulls = [[box_hull([nd.box, sys.set_forward(H, -M)]) for H in hulls[2 * i] + hulls[2 * i + 1]]
                 for i, nd in enumerate(levels[lv])]
        worst = max(worst, *(box_diam(H) for hs in hulls for H in hs))
    return worst


def bowen_separated(points, T: int, threshold: Fraction) -> tuple[bool, Dyadic | None]:
    """Exact check that every pair has ``max_{t<=T} d(sigma^t a, sigma^t b) > threshold``.

    Coordinate j contributes ``|a_j - b_j| 2**-w_j`` with ``w_j = dist(j, [0, T])``;
    only coordinates whose weight can beat the threshold are scanned, in
    integer arithmetic at a common scale.
    """
    N = len(points)
    if N < 2:
        return True, None
    fills = {p.fill for p in points}
    if len(fills) > 1:
        raise IncompatibleRepresentation("points with different fills")
    w_cap = max(0, math.ceil(math.log2(1 / threshold))) + 1
    keys = sorted({j for p in points for j in p.support
                   if (-j if j < 0 else max(0, j - T)) <= w_cap})
    if not keys:
        return False, Dyadic(0)
    vals = [[p[j] for j in keys] for p in points]
    P = max(v.frac_bits() for row in vals for v in row)
    P = max(P, threshold.denominator.bit_length())
    best = np.zeros((N, N), dtype=object if P + 4 > 60 else np.int64)
    # compare 2^(S - w_j) |a_j - b_j| at scale 2^(P + S)
    S = w_cap
    for col, j in enumerate(keys):
        w = -j if j < 0 else max(0, j - T)
        v = np.array([row[col].scaled(P) for row in vals],
                     dtype=object if P + S + 4 > 60 else np.int64)
        diff = np.abs(v[:, None] - v[None, :]) * (1 << (S - w))
        best = np.maximum(best, diff)
    iu = np.triu_indices(N, 1)
    pair = best[iu]
    mn = int(min(pair))
    dmin = Dyadic(mn, -(P + S))
    return Fraction(mn, 1 << (P + S)) > threshold, dmin
