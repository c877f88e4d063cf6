"""First increasing times of balls and sets under iteration."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BisectionStalled, NotIncreasedWithinBudget
from .geometry import Dyadic
from .systems import Bounded

BUDGET_CAP = 100_000
_ESCALATIONS = 2


@dataclass
class FirstTimeRecord:
    system_id: str
    x: object
    r: object
    threshold: object
    n1: int
    diam_trace: list = field(default_factory=list)
    budget_used: int = 0
    ambiguous_steps: list = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return not self.diam_trace or not isinstance(self.diam_trace[0][1], Bounded)


def _as_value(v):
    if isinstance(v, (Dyadic, Fraction, int, float)):
        return v
    return Dyadic.coerce(v)


def default_budget(sys, r, threshold) -> int:
    """Ten times a scale-based guess at n1, capped."""
    r, t = float(r), float(threshold)
    if getattr(sys, "exact", True):
        guess = max(1.0, math.log2(max(t / r, 1.0)) + 2)
    else:
        guess = max(1.0, t / r)
    return int(min(BUDGET_CAP, 10 * guess + 10))


def _exceeds(d, threshold):
    """True/False for exact values; for bounds, None when they straddle."""
    if isinstance(d, Bounded):
        if d.lower > threshold:
            return True
        if d.upper <= threshold:
            return False
        return None
    return d > threshold


def first_increase(sys, x, r, threshold, budget: int | None = None) -> FirstTimeRecord:
    """Smallest j with ``diam f^j(B(x, r)) > threshold`` (ties do not count)."""
    if budget is None:
        budget = default_budget(sys, r, threshold)
    budget = min(int(budget), BUDGET_CAP)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rec = FirstTimeRecord(sys.id, x, r, threshold, -1)
    gen = sys.images(x, r)
    level = 0
    samples = getattr(sys, "samples", None)
    j = 0
    while True:
        d = sys.image_diam(next(gen))
        hit = _exceeds(d, threshold)
        while hit is None and samples is not None and level < _ESCALATIONS:
            # denser boundary sampling from here on; replay the first j steps once
            level += 1
            gen = sys.images(x, r, samples=samples * 4 ** level)
            for _ in range(j):
                next(gen)
            d = sys.image_diam(next(gen))
            hit = _exceeds(d, threshold)
        if hit is None:
            rec.ambiguous_steps.append(j)
            hit = False
        rec.diam_trace.append((j, d))
        if hit:
            rec.n1 = j
            rec.budget_used = j
            return rec
        if j >= budget:
            break
        j += 1
    raise NotIncreasedWithinBudget(budget, f"x={x!r}, r={r}, threshold={threshold}")


def continuum_first_increase(sys, C, threshold, budget: int = 1000) -> FirstTimeRecord:
    """First increasing time of a set ``C`` instead of a ball."""
    budget = min(int(budget), BUDGET_CAP)
    rec = FirstTimeRecord(sys.id, C, None, threshold, -1)
    for j, img in enumerate(sys.set_images(C)):
        d = sys.image_diam(img)
        rec.diam_trace.append((j, d))
        hit = _exceeds(d, threshold)
        if hit:
            rec.n1 = j
            rec.budget_used = j
            return rec
        if hit is None:
            rec.ambiguous_steps.append(j)
        if j >= budget:
            break
    raise NotIncreasedWithinBudget(budget, f"set {C!r}, threshold={threshold}")


def _n1_job(args):
    sys, x, r, threshold, budget = args
    return first_increase(sys, x, r, threshold, budget).n1


def uniform_bound(sys, r, sample, threshold=None, budget: int | None = None, jobs: int = 1) -> int:
    """Largest n1 over a sample: an empirical stand-in for a uniform bound."""
    sample = list(sample)
    if not sample:
        raise ValueError("sample must be nonempty")
    if threshold is None:
        threshold = sys.epsilon
    args = [(sys, x, r, threshold, budget) for x in sample]
    if jobs > 1 and len(sample) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return max(ex.map(_n1_job, args))
    return max(map(_n1_job, args))


def refine_radius(sys, x, r_k, epsilon, tol=0, max_iter: int = 400):
    """Bisect for ``r < r_k`` whose image at step ``n1(x, r_k, eps)`` has
    diameter in ``[eps - tol, eps]``; then ``n1(x, r, eps) > n1(x, r_k, eps)``."""
    n = first_increase(sys, x, r_k, epsilon).n1

    def f(r):
        d = sys.image_diam(sys.ball_image(x, r, n))
        return d.lower if isinstance(d, Bounded) else d

    exact = getattr(sys, "exact", False) and not isinstance(r_k, float)
    if exact:
        hi = r_k if isinstance(r_k, Fraction) else Dyadic.coerce(r_k)
        lo = hi * 0
        tol = Fraction(tol) if not isinstance(tol, (Dyadic, Fraction)) else tol
    else:
        lo, hi, tol = 0.0, float(r_k), float(tol) if tol else 1e-3 * float(epsilon)
    f_lo, f_hi = f(hi) * 0, f(hi)
    if not f_hi > epsilon:
        raise BisectionStalled("diameter at r_k does not exceed epsilon")
    for _ in range(max_iter):
        if lo > 0 and f_lo >= epsilon - tol:
            return lo
        if isinstance(lo, Fraction) and f_hi != f_lo:
            # the diameter is piecewise linear in r; try the chord root first
            guess = lo + (Fraction(epsilon) - f_lo) * (hi - lo) / (f_hi - f_lo)
            if 0 < guess < hi and f(guess) == epsilon:
                return guess
        mid = (lo + hi) / 2 if not isinstance(lo, Dyadic) else (lo + hi).ldexp(-1)
        fm = f(mid)
        if fm < f_lo or fm > f_hi:
            raise BisectionStalled(f"diameter not monotone in the radius near r={mid}")
        if fm > epsilon:
            hi, f_hi = mid, fm
        else:
            lo, f_lo = mid, fm
    raise BisectionStalled(f"no radius within tolerance after {max_iter} halvings")
