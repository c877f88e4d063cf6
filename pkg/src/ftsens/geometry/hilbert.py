"""Points and coordinatewise boxes in the Hilbert cube [0,1]^Z.

The metric is the weighted sup-metric ``sup_i |x_i - y_i| / 2**|i|``. Every
quantity here is an exact :class:`Dyadic`.

A :class:`BoxContinuum` is a product of closed intervals. Finitely many
coordinates are explicit (the window); every other coordinate is the interval
``[v - rho(i), v + rho(i)] & [0, 1]`` around a common fill value ``v``, where
``rho`` is the pointwise maximum of a few :class:`RadiusLaw` objects. Each law
is ``scale * 2**(slope * (i + shift))`` with one slope on each side of its
breakpoint ``i = -shift``. Balls, their shift images, and the closed-form
unstable continua of the shift are all of this form, and so are coordinatewise
hulls of such boxes.

Two facts make the infinite products finite to evaluate:

* Outside the special indices (window keys, breakpoints, 0) each law is in one
  linear regime, and ``rho(i) / 2**|i|`` never increases moving outward.
  Interval length over radius never increases with the radius, so the
  weighted length is non-increasing outward and a diameter is attained within
  one step of the special span.
* Comparisons between log-linear radii and fixed dyadic constants change sign
  at most once, at a distance bounded by the bit sizes involved. Past that
  distance every coordinatewise predicate is constant, so scanning a finite
  range decides it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..errors import IncompatibleRepresentation, PrecisionEscalation
from .dyadic import HALF, ONE, ZERO, Dyadic

_ESCALATION_CAP = 4096


def _d(v) -> Dyadic:
    return Dyadic.coerce(v)


class HilbertPoint:
    """Finitely supported point: ``support`` overrides a constant ``fill``."""

    __slots__ = ("support", "fill", "_key")

    def __init__(self, support: Mapping[int, object] | None = None, fill=HALF):
        fill = _d(fill)
        if not ZERO <= fill <= ONE:
            raise ValueError("fill must lie in [0,1]")
        clean = {}
        for i, v in (support or {}).items():
            v = _d(v)
            if not ZERO <= v <= ONE:
                raise ValueError(f"coordinate {i} = {v} outside [0,1]")
            if v != fill:
                clean[int(i)] = v
        object.__setattr__(self, "support", clean)
        object.__setattr__(self, "fill", fill)
        object.__setattr__(self, "_key", (tuple(sorted(clean.items(), key=lambda t: t[0])), fill))

    def __setattr__(self, name, value):
        raise AttributeError("HilbertPoint is immutable")

    def __reduce__(self):
        return HilbertPoint, (self.support, self.fill)

    @classmethod
    def constant(cls, v=HALF) -> HilbertPoint:
        return cls({}, v)

    def __getitem__(self, i: int) -> Dyadic:
        return self.support.get(i, self.fill)

    def shifted(self, m: int) -> HilbertPoint:
        """The point ``sigma^m(x)``, i.e. coordinates ``x_{i+m}``."""
        if m == 0:
            return self
        return HilbertPoint({i - m: v for i, v in self.support.items()}, self.fill)

    def with_coords(self, updates: Mapping[int, object]) -> HilbertPoint:
        sup = dict(self.support)
        sup.update({int(i): _d(v) for i, v in updates.items()})
        return HilbertPoint(sup, self.fill)

    def window(self, w: int) -> dict[int, Dyadic]:
        return {i: self[i] for i in range(-w, w + 1)}

    def __eq__(self, other):
        return isinstance(other, HilbertPoint) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        items = ", ".join(f"{i}: {v}" for i, v in sorted(self.support.items()))
        return f"HilbertPoint({{{items}}}, fill={self.fill})"


def hilbert_dist(x: HilbertPoint, y: HilbertPoint) -> Dyadic:
    keys = set(x.support) | set(y.support)
    best = ZERO
    for i in keys:
        best = max(best, abs(x[i] - y[i]).ldexp(-abs(i)))
    gap = abs(x.fill - y.fill)
    if gap:
        k = 0
        while k in keys and -k in keys:
            k += 1
        best = max(best, gap.ldexp(-k))
    return best


@dataclass(frozen=True)
class RadiusLaw:
    """Radius ``scale * 2**(slope * (i + shift))``; slope is ``right`` when
    ``i + shift >= 0`` and ``left`` otherwise."""

    scale: Dyadic
    shift: int = 0
    left: int = 0
    right: int = 0

    def exponent(self, i: int) -> int:
        t = i + self.shift
        return self.right * t if t >= 0 else self.left * t

    def at(self, i: int) -> Dyadic:
        return self.scale.ldexp(self.exponent(i))

    def shifted(self, m: int) -> RadiusLaw:
        return RadiusLaw(self.scale, self.shift + m, self.left, self.right)

    @property
    def breakpoint(self) -> int:
        return -self.shift


@dataclass(frozen=True)
class WeightedInterval:
    index: int
    lo: Dyadic
    hi: Dyadic

    @property
    def weight(self) -> Dyadic:
        return ONE.ldexp(-abs(self.index))

    @property
    def length(self) -> Dyadic:
        return self.hi - self.lo

    @property
    def weighted_length(self) -> Dyadic:
        return (self.hi - self.lo).ldexp(-abs(self.index))


class BoxContinuum:
    """Product of closed intervals with an explicit window and a law-driven tail."""

    __slots__ = ("window_map", "fill", "laws", "_key")

    def __init__(self, window: Mapping[int, tuple] | None = None, fill=HALF,
                 laws: Iterable[RadiusLaw] = ()):
        fill = _d(fill)
        if not ZERO <= fill <= ONE:
            raise ValueError("fill must lie in [0,1]")
        win = {}
        for i, (lo, hi) in (window or {}).items():
            lo, hi = _d(lo), _d(hi)
            if not ZERO <= lo <= hi <= ONE:
                raise ValueError(f"coordinate {i}: [{lo}, {hi}] is not a nonempty subinterval of [0,1]")
            win[int(i)] = (lo, hi)
        uniq = []
        for law in laws:
            if law.scale < 0:
                raise ValueError("negative radius scale")
            if law.scale and law not in uniq:
                uniq.append(law)
        object.__setattr__(self, "window_map", win)
        object.__setattr__(self, "fill", fill)
        object.__setattr__(self, "laws", tuple(uniq))
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        if name == "_key":
            object.__setattr__(self, name, value)
            return
        raise AttributeError("BoxContinuum is immutable")

    def __reduce__(self):
        return BoxContinuum, (self.window_map, self.fill, self.laws)

    # construction -------------------------------------------------------

    @classmethod
    def point(cls, x: HilbertPoint) -> BoxContinuum:
        return cls({i: (v, v) for i, v in x.support.items()}, x.fill, ())

    @classmethod
    def centered(cls, x: HilbertPoint, law: RadiusLaw) -> BoxContinuum:
        """Box ``prod [x_i - rho(i), x_i + rho(i)] & [0,1]`` for a single law."""
        win = {i: _clip(v, law.at(i)) for i, v in x.support.items()}
        return cls(win, x.fill, (law,))

    @classmethod
    def ball_image(cls, x: HilbertPoint, r, j: int = 0) -> BoxContinuum:
        """``sigma^j`` of the closed ball ``B(x, r)``."""
        r = _d(r)
        law = RadiusLaw(r, j, -1, 1)
        win = {}
        for k, v in x.support.items():
            i = k - j
            win[i] = _clip(v, law.at(i))
        return cls(win, x.fill, (law,))

    # structure ----------------------------------------------------------

    @property
    def W(self) -> int:
        keys = list(self.window_map) + [law.breakpoint for law in self.laws]
        return max((abs(k) for k in keys), default=0)

    @property
    def tail_rule(self) -> str:
        if not self.laws:
            return "constant-point"
        sat = max(self.fill, ONE - self.fill)
        if all(law.left == 0 and law.right == 0 for law in self.laws) and \
                any(law.scale >= sat for law in self.laws):
            return "full-interval"
        return "formula"

    def shifted(self, m: int) -> BoxContinuum:
        """``sigma^m`` of the box: new coordinate i is old coordinate i+m."""
        if m == 0:
            return self
        # shifting preserves validity, so skip the constructor checks
        out = object.__new__(BoxContinuum)
        object.__setattr__(out, "window_map", {i - m: iv for i, iv in self.window_map.items()})
        object.__setattr__(out, "fill", self.fill)
        object.__setattr__(out, "laws", tuple(law.shifted(m) for law in self.laws))
        object.__setattr__(out, "_key", None)
        return out

    def special_span(self) -> tuple[int, int]:
        keys = [0, *self.window_map, *(law.breakpoint for law in self.laws)]
        return min(keys), max(keys)

    def radius(self, i: int) -> Dyadic:
        return max((law.at(i) for law in self.laws), default=ZERO)

    def interval(self, i: int) -> tuple[Dyadic, Dyadic]:
        iv = self.window_map.get(i)
        if iv is not None:
            return iv
        return _clip(self.fill, self.radius(i))

    def coordinate(self, i: int) -> WeightedInterval:
        lo, hi = self.interval(i)
        return WeightedInterval(i, lo, hi)

    def coordinates(self, w: int) -> list[WeightedInterval]:
        return [self.coordinate(i) for i in range(-w, w + 1)]

    def center(self) -> HilbertPoint:
        """Midpoint of every coordinate interval (tails are centred at the fill
        unless clipped; clipped tails still contain the fill)."""
        sup = {i: (lo + hi).ldexp(-1) for i, (lo, hi) in self.window_map.items()}
        return HilbertPoint(sup, self.fill)

    # exact integer evaluation ------------------------------------------

    def _bits(self, lo: int, hi: int) -> int:
        bits = self.fill.frac_bits()
        for a, b in self.window_map.values():
            bits = max(bits, a.frac_bits(), b.frac_bits())
        for law in self.laws:
            e = min(law.exponent(lo), law.exponent(hi),
                    law.exponent(min(max(law.breakpoint, lo), hi)))
            bits = max(bits, -(law.scale.exponent + e))
        return bits

    def _int_intervals(self, lo: int, hi: int, P: int) -> list[tuple[int, int]]:
        one = 1 << P
        cap = 2 << P
        c = self.fill.scaled(P)
        laws = [(law, law.scale.mantissa, law.scale.exponent + P,
                 law.scale.mantissa.bit_length()) for law in self.laws]
        win = self.window_map
        out = []
        for i in range(lo, hi + 1):
            iv = win.get(i)
            if iv is not None:
                out.append((iv[0].scaled(P), iv[1].scaled(P)))
                continue
            rho = 0
            for law, m, e0, mb in laws:
                sh = e0 + law.exponent(i)
                if sh + mb > P + 2:
                    rho = cap
                    break
                v = m << sh
                if v > rho:
                    rho = v
            out.append((max(c - rho, 0), min(c + rho, one)))
        return out

    def __eq__(self, other):
        if not isinstance(other, BoxContinuum):
            return NotImplemented
        return hausdorff_box(self, other) == 0

    def __hash__(self):
        return hash((self.fill, len(self.window_map)))

    def __repr__(self):
        return (f"BoxContinuum(window={len(self.window_map)} coords, fill={self.fill}, "
                f"laws={list(self.laws)})")


def _clip(c: Dyadic, rho: Dyadic) -> tuple[Dyadic, Dyadic]:
    lo = c - rho
    hi = c + rho
    return (lo if lo > 0 else ZERO, hi if hi < 1 else ONE)


def box_diam(C: BoxContinuum) -> Dyadic:
    """Exact ``sup_i |I_i| / 2**|i|``."""
    a, b = C.special_span()
    lo, hi = a - 1, b + 1
    P = C._bits(lo, hi)
    A = max(abs(lo), abs(hi))
    best = 0
    i = lo
    for l, h in C._int_intervals(lo, hi, P):
        w = (h - l) << (A - abs(i))
        if w > best:
            best = w
        i += 1
    return Dyadic(best, -(P + A))


def widest_coordinate(C: BoxContinuum) -> int:
    """Index attaining the diameter; ties go to the smallest |i|, then to i >= 0."""
    a, b = C.special_span()
    lo, hi = a - 1, b + 1
    P = C._bits(lo, hi)
    A = max(abs(lo), abs(hi))
    best, arg = -1, 0
    for i, (l, h) in zip(range(lo, hi + 1), C._int_intervals(lo, hi, P)):
        w = (h - l) << (A - abs(i))
        if w > best or (w == best and (abs(i), -i) < (abs(arg), -arg)):
            best, arg = w, i
    return arg


# multi-box predicates ------------------------------------------------------

def _log_extent(values: Iterable[Dyadic]) -> int:
    ext = 0
    for v in values:
        if v:
            a, b = v.log2_bounds()
            ext = max(ext, abs(a), abs(b))
    return ext


def _stable_margin(boxes: Sequence[BoxContinuum], points: Sequence[HilbertPoint] = ()) -> int:
    fills = [bx.fill for bx in boxes] + [p.fill for p in points]
    consts = list(fills) + [ONE - f for f in fills]
    consts += [abs(f - g) for f in fills for g in fills]
    consts += [law.scale for bx in boxes for law in bx.laws]
    return 2 * _log_extent(consts) + 8


def _joint_span(boxes: Sequence[BoxContinuum], points: Sequence[HilbertPoint] = ()) -> tuple[int, int]:
    spans = [bx.special_span() for bx in boxes]
    keys = [s for sp in spans for s in sp]
    for p in points:
        keys += list(p.support)
    return min(keys, default=0), max(keys, default=0)


def _scan(boxes: Sequence[BoxContinuum], margin: int, points: Sequence[HilbertPoint] = ()):
    a, b = _joint_span(boxes, points)
    lo, hi = a - margin, b + margin
    P = max(bx._bits(lo - 1, hi + 1) for bx in boxes)
    for p in points:
        P = max(P, p.fill.frac_bits(), *(v.frac_bits() for v in p.support.values()))
    ints = [bx._int_intervals(lo, hi, P) for bx in boxes]
    return lo, hi, P, ints


def box_subset(A: BoxContinuum, B: BoxContinuum) -> bool:
    """Exact test of A contained in B."""
    lo, hi, P, (ia, ib) = _scan([A, B], _stable_margin([A, B]))
    return all(b0 <= a0 and a1 <= b1 for (a0, a1), (b0, b1) in zip(ia, ib))


def boxes_intersect(A: BoxContinuum, B: BoxContinuum) -> bool:
    lo, hi, P, (ia, ib) = _scan([A, B], _stable_margin([A, B]))
    return all(max(a0, b0) <= min(a1, b1) for (a0, a1), (b0, b1) in zip(ia, ib))


def box_contains_point(C: BoxContinuum, x: HilbertPoint) -> bool:
    lo, hi, P, (ic,) = _scan([C], _stable_margin([C], [x]), [x])
    for i, (l, h) in zip(range(lo, hi + 1), ic):
        v = x[i].scaled(P)
        if not l <= v <= h:
            return False
    return True


def box_hull(boxes: Sequence[BoxContinuum]) -> BoxContinuum:
    """Coordinatewise hull; its forward images have the same diameters as the
    union of the boxes, since the distance between two boxes' points is
    maximised coordinate by coordinate."""
    if not boxes:
        raise ValueError("empty hull")
    fill = boxes[0].fill
    if any(bx.fill != fill for bx in boxes):
        raise IncompatibleRepresentation("hull needs a common fill value")
    keys = set()
    for bx in boxes:
        keys |= set(bx.window_map)
    win = {}
    for i in keys:
        ivs = [bx.interval(i) for bx in boxes]
        win[i] = (min(iv[0] for iv in ivs), max(iv[1] for iv in ivs))
    laws = [law for bx in boxes for law in bx.laws]
    return BoxContinuum(win, fill, _prune_laws(laws))


def _prune_laws(laws: list[RadiusLaw]) -> list[RadiusLaw]:
    """Drop laws that are pointwise dominated by another law everywhere."""
    keep = []
    for law in laws:
        if any(_dominates(o, law) for o in keep):
            continue
        keep = [o for o in keep if not _dominates(law, o)]
        keep.append(law)
    return keep


def _dominates(a: RadiusLaw, b: RadiusLaw) -> bool:
    # same slopes and breakpoint: compare scales
    return (a.shift, a.left, a.right) == (b.shift, b.left, b.right) and a.scale >= b.scale


def hausdorff_box(A: BoxContinuum, B: BoxContinuum) -> Dyadic:
    """Exact ``sup_i d_H(I_i, J_i) / 2**|i|``; widens the window until the
    unseen tail provably cannot beat the maximum found."""
    margin = _stable_margin([A, B])
    while True:
        try:
            return _hausdorff_at(A, B, margin)
        except PrecisionEscalation:
            margin *= 2
            if margin > _ESCALATION_CAP:
                raise IncompatibleRepresentation(
                    "tails of the two boxes could not be aligned within the escalation cap") from None


def _hausdorff_at(A: BoxContinuum, B: BoxContinuum, margin: int) -> Dyadic:
    lo, hi, P, (ia, ib) = _scan([A, B], margin)
    S = max(abs(lo), abs(hi)) + 1
    best = 0
    for i, ((a0, a1), (b0, b1)) in zip(range(lo, hi + 1), zip(ia, ib)):
        w = max(abs(a0 - b0), abs(a1 - b1)) << (S - abs(i))
        if w > best:
            best = w
    # past the stable margin the coordinates either coincide forever or the
    # distance is positive; in the second case the tail is at most 2^-|i|
    for edge in (lo - 1, hi + 1):
        (a0, a1), = A._int_intervals(edge, edge, P)
        (b0, b1), = B._int_intervals(edge, edge, P)
        if (a0, a1) != (b0, b1):
            bound = (1 << P) << (S - abs(edge))
            if best < bound:
                raise PrecisionEscalation(f"tail bound at {edge} not dominated")
    return Dyadic(best, -(P + S))
