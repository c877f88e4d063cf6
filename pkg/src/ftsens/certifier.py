"""Empirical checks of the two first-time conditions, monotone constants, and
syndetic increase.

Nothing here decides first-time sensitivity: bounded differences on a finite
sample are evidence, and growing differences are a statistical signature of a
violation. Reports say which of the two they carry.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotIncreasedWithinBudget
from .firsttime import first_increase
from .geometry import Dyadic
from .serialize import csv_text, dumps, provenance

CERTIFIED = "certified-at-scale"
SUSPECTED = "violation-suspected"
HEURISTIC = "strict growth of the per-radius maximum over the last 5 schedule doublings"
TREND_DOUBLINGS = 5


@dataclass
class GammaStats:
    gamma: object
    f1: list = field(default_factory=list)   # (sample index, k, difference)
    f2: list = field(default_factory=list)
    k_gamma: int | None = None
    f1_slope: float = 0.0
    f2_slope: float = 0.0
    growing: list = field(default_factory=list)  # (sample index, "F1"/"F2")

    @property
    def observed_m_gamma(self) -> int:
        return max([d for _, _, d in self.f1] + [d for _, _, d in self.f2], default=0)

    @property
    def verdict(self) -> str:
        return SUSPECTED if self.growing else CERTIFIED

    def to_dict(self) -> dict:
        return {
            "gamma": str(self.gamma) if not isinstance(self.gamma, float) else self.gamma,
            "k_gamma": self.k_gamma,
            "observed_m_gamma": self.observed_m_gamma,
            "max_f1": max((d for _, _, d in self.f1), default=None),
            "max_f2": max((d for _, _, d in self.f2), default=None),
            "f1_slope": self.f1_slope,
            "f2_slope": self.f2_slope,
            "growing": [list(g) for g in self.growing],
            "verdict": self.verdict,
        }


@dataclass
class CertReport:
    system_id: str
    epsilon: object
    schedule: list
    samples: list
    per_gamma: dict
    rows: list = field(default_factory=list)  # (x, k, gamma, kind, r_k, n1_a, n1_b, diff)
    seed: int | None = None

    @property
    def verdict(self) -> str:
        return SUSPECTED if any(g.verdict == SUSPECTED for g in self.per_gamma.values()) else CERTIFIED

    def to_dict(self) -> dict:
        return {
            "system": self.system_id,
            "epsilon": self.epsilon,
            "schedule": self.schedule,
            "samples": len(self.samples),
            "gammas": [g.to_dict() for g in self.per_gamma.values()],
            "verdict": self.verdict,
            "violation_test": HEURISTIC + " (statistical surrogate, not a proof)",
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        header = ["x", "k", "gamma", "condition", "r_k", "n1_first", "n1_second", "difference",
                  "provenance"]
        return csv_text(header, [(*row, provenance(row[4], self.seed)) for row in self.rows])

    def merge(self, other: CertReport) -> CertReport:
        """Combine two reports over disjoint samples (append and max)."""
        if (self.system_id, self.schedule) != (other.system_id, other.schedule):
            raise ValueError("reports describe different experiments")
        off = len(self.samples)
        per = {}
        for g in self.per_gamma.keys() | other.per_gamma.keys():
            a, b = self.per_gamma.get(g), other.per_gamma.get(g)
            st = GammaStats(g, k_gamma=(a or b).k_gamma)
            for src, shift in ((a, 0), (b, off)):
                if src is None:
                    continue
                st.f1 += [(i + shift, k, d) for i, k, d in src.f1]
                st.f2 += [(i + shift, k, d) for i, k, d in src.f2]
                st.growing += [(i + shift, c) for i, c in src.growing]
            st.f1_slope, st.f2_slope = _slope(st.f1), _slope(st.f2)
            per[g] = st
        rows = self.rows + [(x + off, *rest) for x, *rest in other.rows]
        return CertReport(self.system_id, self.epsilon, self.schedule, self.samples + other.samples,
                          per, rows, self.seed)


def dyadic_schedule(r1, count: int) -> list:
    """``r_k = r1 * 2**(1-k)`` for k = 1..count."""
    if isinstance(r1, float):
        return [r1 * 2.0 ** -k for k in range(count)]
    r1 = Dyadic.coerce(r1) if not isinstance(r1, Fraction) else r1
    if isinstance(r1, Dyadic):
        return [r1.ldexp(-k) for k in range(count)]
    return [r1 / 2 ** k for k in range(count)]


def _sample_job(args):
    sys, idx, x, schedule, gammas, epsilon, budget = args
    n_eps = [first_increase(sys, x, r, epsilon, _budget(budget, k)).n1
             for k, r in enumerate(schedule)]
    out = {}
    for g in gammas:
        ks = [k for k, r in enumerate(schedule) if r <= g]
        n_g = {}
        for k in ks:
            try:
                n_g[k] = first_increase(sys, x, schedule[k], g, _budget(budget, k)).n1
            except NotIncreasedWithinBudget as exc:
                exc.context = f"x#{idx}, k={k + 1}, gamma={g}: {exc.context}"
                raise
        out[g] = (ks, n_g)
    return idx, n_eps, out


def _budget(budget, k):
    if budget is None or isinstance(budget, int):
        return budget
    return budget[k]


def certify(sys, x_samples, schedule, gammas, epsilon, budget=None, jobs: int = 1,
            seed: int | None = None) -> CertReport:
    """F1/F2 differences for every sample, gamma, and schedule index with ``r_k <= gamma``.

    Schedule indices are reported 1-based. ``budget`` may be a single integer
    or one per schedule entry.
    """
    samples = list(x_samples)
    schedule = list(schedule)
    if not samples:
        raise ValueError("empty sample list")
    if any(not b < a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly decreasing")
    for g in gammas:
        if not 0 < g <= epsilon:
            raise ValueError(f"gamma {g} outside (0, epsilon]")
    args = [(sys, i, x, schedule, list(gammas), epsilon, budget) for i, x in enumerate(samples)]
    if jobs > 1 and len(samples) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sample_job, args))
    else:
        results = list(map(_sample_job, args))

    per = {g: GammaStats(g, k_gamma=_k_gamma(sys, g)) for g in gammas}
    rows = []
    for idx, n_eps, out in results:
        for g, (ks, n_g) in out.items():
            st = per[g]
            seq1, seq2 = [], []
            for k in ks:
                d2 = abs(n_g[k] - n_eps[k])
                st.f2.append((idx, k + 1, d2))
                seq2.append((schedule[k], d2))
                rows.append((idx, k + 1, g, "F2", schedule[k], n_g[k], n_eps[k], d2))
                if k + 1 in n_g:
                    d1 = abs(n_g[k + 1] - n_g[k])
                    st.f1.append((idx, k + 1, d1))
                    seq1.append((schedule[k], d1))
                    rows.append((idx, k + 1, g, "F1", schedule[k], n_g[k + 1], n_g[k], d1))
            if _growing(seq1):
                st.growing.append((idx, "F1"))
            if _growing(seq2):
                st.growing.append((idx, "F2"))
    for st in per.values():
        st.f1_slope, st.f2_slope = _slope(st.f1), _slope(st.f2)
    return CertReport(sys.id, epsilon, schedule, samples, per, rows, seed)


def _k_gamma(sys, g):
    fn = getattr(sys, "k_gamma", None)
    return fn(g) if fn is not None else None


def _growing(seq) -> bool:
    """Strict increase over a tail spanning at least ``TREND_DOUBLINGS`` halvings of r."""
    if len(seq) < 2:
        return False
    r_last = float(seq[-1][0])
    tail = [d for r, d in seq if math.log2(float(r) / r_last) <= TREND_DOUBLINGS + 1e-9]
    first = next(float(r) for r, _ in seq if math.log2(float(r) / r_last) <= TREND_DOUBLINGS + 1e-9)
    if math.log2(first / r_last) < TREND_DOUBLINGS - 1e-9:
        return False
    return all(b > a for a, b in zip(tail, tail[1:])) and _fit([(i, d) for i, d in enumerate(tail)]) > 0


def _fit(points) -> float:
    if len(points) < 2:
        return 0.0
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if np.ptp(x) == 0:
        return 0.0
    return round(float(np.polyfit(x, y, 1)[0]), 12) + 0.0


def _slope(entries) -> float:
    """Least-squares slope of the per-k maximum difference against k."""
    best = {}
    for _, k, d in entries:
        best[k] = max(best.get(k, 0), d)
    return _fit(sorted(best.items()))


# monotone constants ----------------------------------------------------------

def monotone_mgamma(raw: dict, epsilon) -> dict:
    """Non-increasing constants from raw per-threshold bounds on the grid ``eps/n``.

    ``m_1 = 3 raw[eps/2]`` and ``m_n = max(3 raw[eps/n], m_(n-1) + 1)``; the
    value ``m_n`` applies to thresholds in ``[eps/n, eps/(n-1))``. The result
    is keyed by ``eps/n`` for n = 1..N, with ``eps`` itself carrying ``m_1``.
    """
    eps = Fraction(epsilon) if not isinstance(epsilon, Dyadic) else epsilon.to_fraction()
    by_n = {}
    for g, m in raw.items():
        gf = Fraction(g) if not isinstance(g, Dyadic) else g.to_fraction()
        n = eps / gf
        if n.denominator != 1 or n < 2:
            raise ValueError(f"threshold {g} is not of the form eps/n with n >= 2")
        by_n[int(n)] = m
    if not by_n:
        return {}
    top = max(by_n)
    missing = [n for n in range(2, top + 1) if n not in by_n]
    if missing:
        raise ValueError(f"grid incomplete: missing eps/n for n in {missing}")
    ms = {1: 3 * by_n[2]}
    for n in range(2, top + 1):
        ms[n] = max(3 * by_n[n], ms[n - 1] + 1)
    return {_like(epsilon, eps / n): m for n, m in ms.items()}


def _like(template, q: Fraction):
    if isinstance(template, Dyadic):
        try:
            return Dyadic.from_fraction(q)
        except ValueError:
            return q
    return q


def mgamma_at(schedule: dict, gamma, epsilon) -> int:
    """Look up ``m_gamma`` in a monotone schedule: ``gamma`` in ``[eps/n, eps/(n-1))``."""
    eps = Fraction(epsilon) if not isinstance(epsilon, Dyadic) else epsilon.to_fraction()
    g = Fraction(gamma) if not isinstance(gamma, Dyadic) else gamma.to_fraction()
    n = max(1, math.ceil(eps / g))
    for key, m in schedule.items():
        kf = Fraction(key) if not isinstance(key, Dyadic) else key.to_fraction()
        if kf == eps / n:
            return m
    raise KeyError(f"no constant stored for n = {n}")


# syndetic increase -----------------------------------------------------------

@dataclass
class IncreasingTimeSet:
    threshold: object
    horizon: int
    hits: list
    max_gap: int

    def to_dict(self) -> dict:
        return {"threshold": self.threshold, "horizon": self.horizon,
                "hits": self.hits, "max_gap": self.max_gap}


def syndetic_gaps(sys, C, c, horizon: int, start: int = 0) -> IncreasingTimeSet:
    """Times ``n <= horizon`` with ``diam f^n(C) >= c`` and the largest gap
    between consecutive elements of ``{start, horizon}`` joined with the hits
    at or after ``start``."""
    if not 0 <= start <= horizon:
        raise ValueError("need 0 <= start <= horizon")
    hits = []
    for n, img in enumerate(sys.set_images(C)):
        if n > horizon:
            break
        d = sys.image_diam(img)
        lower = getattr(d, "lower", d)
        if lower >= c:
            hits.append(n)
    marks = sorted({start, horizon, *(h for h in hits if h >= start)})
    gap = max((b - a for a, b in zip(marks, marks[1:])), default=0)
    return IncreasingTimeSet(c, horizon, hits, gap)
