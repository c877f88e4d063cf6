"""Local unstable continua built as limits of forward images of shrinking balls
around backward iterates, with exact closed forms for the shift."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NoConvergence, NotIncreasedWithinBudget, RadiusWindowEmpty
from .firsttime import continuum_first_increase, first_increase
from .geometry import (BoxContinuum, Dyadic, HilbertPoint, RadiusLaw, box_contains_point,
                       box_diam, circle_dist, cloud_hausdorff, hausdorff_box)
from .serialize import dumps, jsonable
from .systems import (Arc, CircleCoord, PointCloud, ProductImage, ProductSystem, ShiftSystem,
                      TorusLinear, TorusParallelotope)

SHIFT_TOL = Dyadic(1, -20)
SAMPLED_TOL = 1e-6
CAUCHY_RUN = 3
_MAX_REFINE = 200
_WINDOW_CAP = 64


@dataclass
class Stage:
    m: int
    radius: object
    n1: int
    image: object
    residual: object = None  # distance to the previous stage


@dataclass
class ContinuumRecord:
    system_id: str
    anchor: object
    gamma: object
    m_gamma: int
    stages: list = field(default_factory=list)
    converged: bool = False
    hausdorff_residual: object = None
    delta: object = None

    @property
    def final(self):
        return self.stages[-1].image if self.stages else None

    def to_dict(self) -> dict:
        out = {
            "system": self.system_id,
            "anchor": jsonable(self.anchor),
            "gamma": jsonable(self.gamma),
            "m_gamma": self.m_gamma,
            "converged": self.converged,
            "hausdorff_residual": jsonable(self.hausdorff_residual),
            "delta": jsonable(self.delta),
            "stages": [],
        }
        for st in self.stages:
            row = {"m": st.m, "radius": jsonable(st.radius), "n1": st.n1,
                   "residual": jsonable(st.residual)}
            if isinstance(st.image, BoxContinuum):
                W = min(st.image.W, _WINDOW_CAP)
                row["window"] = {str(c.index): [str(c.lo), str(c.hi)] for c in st.image.coordinates(W)}
            out["stages"].append(row)
        return out

    def to_json(self) -> str:
        return dumps(self.to_dict())


# closed forms for the shift ----------------------------------------------------

def shift_fu_closed_form(x: HilbertPoint, k: int, epsilon) -> BoxContinuum:
    """The box ``prod [x_i - eps 2^(i-k), x_i + eps 2^(i-k)] & [0,1]``."""
    eps = Dyadic.coerce(epsilon)
    if not 0 < eps < Fraction(1, 4):
        raise ValueError("closed form needs 0 < epsilon < 1/4")
    if k < 0:
        raise ValueError("k must be non-negative")
    return BoxContinuum.centered(x, RadiusLaw(eps, -k, 1, 1))


def fu_stage(x: HilbertPoint, k: int, epsilon, j: int) -> BoxContinuum:
    """``sigma^j`` of the closed ball of radius ``eps / 2^(j+k)`` about ``sigma^-j(x)``."""
    eps = Dyadic.coerce(epsilon)
    return BoxContinuum.ball_image(x.shifted(-j), eps.ldexp(-(j + k)), j)


def verify_fu_limit(x: HilbertPoint, k: int, epsilon, j: int) -> Dyadic:
    """Hausdorff distance between the stage-``j`` approximant and the closed form."""
    if j < 0:
        raise ValueError("j must be non-negative")
    return hausdorff_box(fu_stage(x, k, epsilon, j), shift_fu_closed_form(x, k, epsilon))


def stage_agreement(x: HilbertPoint, k: int, epsilon, j: int) -> list[int]:
    """Indices ``|i| < j`` where the stage-``j`` approximant and the closed form differ."""
    A, B = fu_stage(x, k, epsilon, j), shift_fu_closed_form(x, k, epsilon)
    return [i for i in range(-j + 1, j) if A.interval(i) != B.interval(i)]


def identify_shift_k(C: BoxContinuum, x: HilbertPoint, epsilon, candidates) -> tuple[int, Dyadic]:
    """Closed-form parameter nearest to ``C`` in the Hausdorff metric."""
    best = None
    for k in candidates:
        d = hausdorff_box(C, shift_fu_closed_form(x, k, epsilon))
        if best is None or d < best[1]:
            best = (k, d)
    if best is None:
        raise ValueError("no candidate parameters")
    return best


def shift_limit(rec: ContinuumRecord, epsilon) -> tuple[BoxContinuum, Dyadic]:
    """Closed-form box nearest the final stage of a converged shift record,
    with its Hausdorff distance to that stage."""
    if not rec.converged:
        raise NoConvergence("record did not converge")
    top = rec.stages[-1].m + 2 * rec.m_gamma + 2
    k, d = identify_shift_k(rec.final, rec.anchor, epsilon, range(top + 1))
    return shift_fu_closed_form(rec.anchor, k, epsilon), d


def stable_segment_box(r) -> BoxContinuum:
    """``{0}`` in every coordinate except ``[0, r]`` at index 0."""
    return BoxContinuum({0: (0, Dyadic.coerce(r))}, 0, ())


def flat_box(x: HilbertPoint, epsilon) -> BoxContinuum:
    """``prod [x_i - eps, x_i + eps] & [0,1]``: unstable in the past but not shrinking."""
    return BoxContinuum.centered(x, RadiusLaw(Dyadic.coerce(epsilon), 0, 0, 0))


# construction -----------------------------------------------------------------

def _shrink(r, q):
    if isinstance(r, Dyadic) and q == 2:
        return r.ldexp(-1)
    return r / q


def _grow(r, q):
    if isinstance(r, Dyadic) and q == 2:
        return r.ldexp(1)
    return r * q


def _between(big, small):
    if isinstance(big, Dyadic):
        return (big + small).ldexp(-1)
    if isinstance(big, Fraction):
        return (big + small) / 2
    return math.sqrt(big * small)


def _n1(sys, y, r, gamma):
    return first_increase(sys, y, r, gamma).n1


def find_window_radius(sys, y, m: int, gamma, m_gamma: int, guess, ratio=2):
    """Radius with ``m < n1(y, r, gamma) <= m + m_gamma``, searched on the
    geometric grid ``guess * ratio^k`` and then by bisection."""
    bound = getattr(sys, "ball_bound", None)
    big = small = None
    r = guess
    for _ in range(_MAX_REFINE):
        if bound is not None and r >= bound:
            big = r
            r = _between(r, small) if small is not None else _shrink(r, ratio)
            continue
        if big is not None and small is not None and isinstance(r, float) \
                and big - small <= 1e-12 * big:
            break  # n1 jumps across the window between two float neighbours
        n = _n1(sys, y, r, gamma)
        if m < n <= m + m_gamma:
            return r, n
        if n <= m:
            big = r
            r = _shrink(r, ratio) if small is None else _between(big, small)
        else:
            small = r
            r = _grow(r, ratio) if big is None else _between(big, small)
    raise RadiusWindowEmpty(m, f"window ({m}, {m + m_gamma}] not hit; last bracket {small}..{big}")


def build_cw_unstable(sys, x, gamma, m_gamma: int, stages, conv_tol=None, ratio=None,
                      guess=None, strict: bool = False) -> ContinuumRecord:
    """Approximants ``f^m(closure B(f^-m(x), r_m))`` with ``n1`` in ``(m, m + m_gamma]``.

    Convergence means ``CAUCHY_RUN`` consecutive residuals below ``conv_tol``.
    With ``strict`` a non-converged run raises :class:`NoConvergence`.

    Give torus anchors as fractions: a float pulled back m steps under a
    hyperbolic matrix and pushed forward again keeps only about
    ``16 - 0.42 m`` digits for the cat map, so float runs stall near m = 30.
    """
    stages = list(stages)
    if any(b <= a for a, b in zip(stages, stages[1:])):
        raise ValueError("stages must be increasing")
    exact = isinstance(sys, ShiftSystem)
    if conv_tol is None:
        conv_tol = SHIFT_TOL if exact else SAMPLED_TOL
    if ratio is None:
        ratio = _natural_ratio(sys)
    rec = ContinuumRecord(sys.id, x, gamma, m_gamma)
    r = guess if guess is not None else _initial_guess(sys, gamma)
    run = 0
    for m in stages:
        y = sys.forward(x, -m)
        r, n = find_window_radius(sys, y, m, gamma, m_gamma, r, ratio)
        img = sys.ball_image(y, r, m)
        st = Stage(m, r, n, img)
        if rec.stages:
            st.residual = residual(sys, rec.stages[-1].image, img)
            run = run + 1 if st.residual < conv_tol else 0
        rec.stages.append(st)
        if run >= CAUCHY_RUN:
            rec.converged = True
    if rec.stages and rec.stages[-1].residual is not None:
        rec.hausdorff_residual = rec.stages[-1].residual
    rec.converged = run >= CAUCHY_RUN
    rec.delta = gamma_floor(sys, gamma, m_gamma)
    if strict and not rec.converged:
        raise NoConvergence(f"residual {rec.hausdorff_residual} did not settle below {conv_tol}")
    return rec


def _natural_ratio(sys):
    base = sys.base if isinstance(sys, ProductSystem) else sys
    if isinstance(base, TorusLinear):
        return base.expansion
    return 2


def _initial_guess(sys, gamma):
    if isinstance(sys, ShiftSystem):
        return Dyadic.coerce(gamma)
    base = sys.base if isinstance(sys, ProductSystem) else sys
    bound = float(base.ball_bound) if base.ball_bound is not None else 1.0
    return min(float(gamma), bound / 2)


def expansion_floor(sys, n: int):
    """``c`` with ``diam f^k(A) >= c diam(A)`` for ``|k| <= n``."""
    if isinstance(sys, ProductSystem):
        sys = sys.base
    fn = getattr(sys, "backward_expansion_floor", None)
    if fn is None:
        raise NotImplementedError(f"no expansion floor for {sys.id}")
    return fn(n)


def gamma_floor(sys, gamma, m_gamma: int):
    """Lower bound for approximant diameters: a set that exceeds ``gamma``
    within ``m_gamma`` further steps is at least this large now."""
    c = expansion_floor(sys, m_gamma)
    if isinstance(c, Dyadic):
        return Dyadic.coerce(gamma) * c
    return float(gamma) * float(c)


# distances between representations ------------------------------------------------

def residual(sys, A, B):
    if isinstance(A, BoxContinuum):
        return hausdorff_box(A, B)
    if isinstance(A, ProductImage):
        base = residual(getattr(sys, "base", None), A.base, B.base)
        return max(float(base), arc_hausdorff(A.arc, B.arc, sys.circle))
    if isinstance(A, TorusParallelotope):
        return cloud_hausdorff(A.sample(12), B.sample(12))
    if isinstance(A, PointCloud):
        return cloud_hausdorff(A.points, B.points)
    raise TypeError(f"no distance for {type(A).__name__}")


def arc_hausdorff(a: Arc, b: Arc, circle) -> float:
    c = float(circle.dist(a.center, b.center))
    return c + abs(float(a.half_width) - float(b.half_width))


def contains_anchor(sys, C, x) -> bool:
    if isinstance(C, BoxContinuum):
        return box_contains_point(C, x)
    if isinstance(C, ProductImage):
        return (contains_anchor(sys.base, C.base, x[0])
                and float(sys.circle.dist(C.arc.center, x[1])) <= float(C.arc.half_width))
    if isinstance(C, TorusParallelotope):
        return all(float(circle_dist(a, b)) <= 1e-12 for a, b in zip(C.center, x))
    if isinstance(C, PointCloud):
        d = np.abs(C.points % 1.0 - np.asarray(x, dtype=float) % 1.0)
        d = np.minimum(d, 1.0 - d).max(axis=1)
        return bool(d.min() <= C.dispersion)
    raise TypeError(f"no membership test for {type(C).__name__}")


# properties of a built continuum --------------------------------------------------

def _diams(sys, C, start: int, count: int):
    img = sys.set_forward(C, start)
    out = []
    for img in _take(sys.set_images(img), count):
        d = sys.image_diam(img)
        out.append(getattr(d, "lower", d))
    return out


def _take(gen, n):
    for _, v in zip(range(n), gen):
        yield v


@dataclass
class GrowthReport:
    ell: int | None
    ell_bound: int
    regular_failures: list
    floor: object
    floor_failures: list
    horizon: int

    @property
    def ok(self) -> bool:
        return self.ell is not None and not self.regular_failures and not self.floor_failures


def check_growth(sys, rec_or_set, epsilon, m_gamma: int | None = None, m_eps: int | None = None,
                 horizon: int = 50, start: int | None = None) -> GrowthReport:
    """Growth within ``2 m_gamma`` steps, a hit in every window ``[n, n + m_eps]``
    for ``start <= n <= horizon``, and the post-growth floor
    ``diam f^n(C) >= delta`` for ``n >= 2 m_gamma``.

    ``start`` defaults to the first growth time: before it the windows can
    be empty (a shift box with parameter k first reaches eps at n = k - 1).
    """
    C = rec_or_set.final if isinstance(rec_or_set, ContinuumRecord) else rec_or_set
    if m_gamma is None:
        m_gamma = rec_or_set.m_gamma
    if m_eps is None:
        m_eps = sys.m_gamma(epsilon)
    diams = _diams(sys, C, 0, horizon + m_eps + 1)
    ell = next((n for n in range(2 * m_gamma + 1) if diams[n] >= epsilon), None)
    if start is None:
        start = ell if ell is not None else 0
    regular = [n for n in range(start, horizon + 1)
               if not any(diams[t] >= epsilon for t in range(n, n + m_eps + 1))]
    c = expansion_floor(sys, m_eps)
    floor = Dyadic.coerce(epsilon) * c if isinstance(c, Dyadic) else float(epsilon) * float(c)
    floor_fail = [n for n in range(2 * m_gamma, horizon + 1) if diams[n] < floor]
    return GrowthReport(ell, 2 * m_gamma, regular, floor, floor_fail, horizon)


@dataclass
class ShrinkReport:
    alpha: object
    start: int
    n_max: int
    failures: list
    diams: list

    @property
    def ok(self) -> bool:
        return not self.failures


def check_backward_shrink(sys, rec_or_set, alphas, n_max: int = 40, m_of=None) -> list[ShrinkReport]:
    """``diam f^-n(C) <= alpha`` for ``m_alpha + 1 <= n <= n_max``.

    A record's final approximant is the image of a ball under ``f^m``; past
    ``n = m`` its preimages are ball preimages and grow, so for records the
    range stops at the last stage. Use :func:`shift_limit` for the limit itself.
    """
    C = rec_or_set.final if isinstance(rec_or_set, ContinuumRecord) else rec_or_set
    if isinstance(rec_or_set, ContinuumRecord) and rec_or_set.stages:
        n_max = min(n_max, rec_or_set.stages[-1].m)
    m_of = m_of or sys.m_gamma
    back = []
    for n in range(n_max + 1):
        d = sys.image_diam(sys.set_forward(C, -n))
        back.append(getattr(d, "lower", d))
    out = []
    for a in alphas:
        start = m_of(a) + 1
        fails = [n for n in range(start, n_max + 1) if back[n] > a]
        out.append(ShrinkReport(a, start, n_max, fails, back))
    return out


def never_increases(sys, C, threshold, budget: int = 200) -> bool:
    """True when no forward image up to ``budget`` exceeds ``threshold``."""
    try:
        continuum_first_increase(sys, C, threshold, budget)
    except NotIncreasedWithinBudget:
        return True
    return False


def controlled_by(sys, x, r, C, c, budget: int | None = None) -> bool:
    """The ball about ``x`` and the subset ``C`` first exceed ``c`` at the same time."""
    return first_increase(sys, x, r, c, budget).n1 == continuum_first_increase(
        sys, C, c, budget or 1000).n1


# products with the identity -------------------------------------------------------

@dataclass
class SliceReport:
    circle_dev: float
    line_dev: float
    tol: float
    points: int

    @property
    def ok(self) -> bool:
        return self.circle_dev <= self.tol and self.line_dev <= self.tol


def product_cloud(img: ProductImage, circle, n_side: int = 16) -> np.ndarray:
    """Samples ``(q1, q2, z)`` of a product image; torus part in the cover."""
    base = img.base.sample(n_side)
    zc = circle.float_value(img.arc.center)
    hw = float(img.arc.half_width)
    zs = zc + np.linspace(-hw, hw, n_side)
    idx = np.arange(len(base)) % n_side
    return np.column_stack([base, zs[idx]])


def product_fu_slice_check(product_sys: ProductSystem, rec, tol: float = 1e-9,
                           n_side: int = 16) -> SliceReport:
    """Circle coordinates stay at the anchor's; the torus part lies on the
    unstable line through the anchor."""
    if product_sys.circle.alpha is not None:
        raise ValueError("slice check needs the identity on the circle factor")
    anchor = rec.anchor
    final = rec.final
    cloud = final if isinstance(final, np.ndarray) else product_cloud(final, product_sys.circle, n_side)
    if len(cloud) <= 1:
        return SliceReport(0.0, 0.0, tol, len(cloud))
    z0 = product_sys.circle.float_value(anchor[1]) if isinstance(anchor[1], CircleCoord) \
        else float(anchor[1])
    dz = np.abs(cloud[:, 2] - z0) % 1.0
    circle_dev = float(np.minimum(dz, 1.0 - dz).max())
    u, _ = product_sys.base.eigenvectors()
    normal = np.array([-u[1], u[0]]) / np.hypot(*u)
    off = cloud[:, :2] - np.array([float(v) for v in anchor[0]])
    off -= np.round(off)
    line_dev = float(np.abs(off @ normal).max())
    return SliceReport(circle_dev, line_dev, tol, len(cloud))
