"""Exact base-2 rationals."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


def _strip(m: int, e: int) -> tuple[int, int]:
    if m == 0:
        return 0, 0
    tz = (m & -m).bit_length() - 1
    return m >> tz, e + tz


class Dyadic:
    """The number ``mantissa * 2**exponent`` with an odd (or zero) mantissa.

    Arithmetic never rounds. Division is only offered by powers of two
    (``ldexp``), since anything else leaves the dyadic rationals.
    """

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        m, e = _strip(int(mantissa), int(exponent))
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    def __reduce__(self):
        return Dyadic, (self.mantissa, self.exponent)

    @classmethod
    def coerce(cls, value) -> Dyadic:
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, str):
            return cls.from_fraction(Fraction(value))
        if isinstance(value, Rational):
            return cls.from_fraction(Fraction(value))
        if isinstance(value, float):
            return cls.from_fraction(Fraction(value))
        raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")

    @classmethod
    def from_fraction(cls, q: Fraction) -> Dyadic:
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, -(den.bit_length() - 1))

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def __float__(self) -> float:
        return float(self.to_fraction())

    def scaled(self, bits: int) -> int:
        """Integer ``self * 2**bits``; raises if that is not an integer."""
        shift = self.exponent + bits
        if shift < 0:
            raise ValueError(f"{self} needs more than {bits} fractional bits")
        return self.mantissa << shift

    def frac_bits(self) -> int:
        """Number of fractional bits needed to represent the value."""
        return max(0, -self.exponent)

    def log2_bounds(self) -> tuple[int, int]:
        """Integers a <= log2|self| < b (self nonzero)."""
        if self.mantissa == 0:
            raise ValueError("log2 of zero")
        return self.exponent, self.exponent + abs(self.mantissa).bit_length()

    def ldexp(self, k: int) -> Dyadic:
        if self.mantissa == 0:
            return self
        return Dyadic(self.mantissa, self.exponent + k)

    def _align(self, other: Dyadic) -> tuple[int, int, int]:
        e = min(self.exponent, other.exponent)
        return (self.mantissa << (self.exponent - e),
                other.mantissa << (other.exponent - e), e)

    def __add__(self, other):
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        return Dyadic.coerce(other) - self

    def __mul__(self, other):
        try:
            other = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __neg__(self):
        return Dyadic(-self.mantissa, self.exponent)

    def __abs__(self):
        return Dyadic(abs(self.mantissa), self.exponent)

    def __bool__(self):
        return self.mantissa != 0

    def _cmp(self, other) -> int:
        if isinstance(other, float):
            other = Fraction(other)
        if not isinstance(other, Dyadic):
            if isinstance(other, (int, Rational)):
                lhs = self.to_fraction()
                return (lhs > other) - (lhs < other)
            raise TypeError
        a, b, _ = self._align(other)
        return (a > b) - (a < b)

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
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
        return hash(self.to_fraction())

    def __repr__(self):
        return f"Dyadic({self.mantissa}, {self.exponent})"

    def __str__(self):
        return str(self.to_fraction())


ZERO = Dyadic(0)
ONE = Dyadic(1)
HALF = Dyadic(1, -1)


def dmin(a: Dyadic, b: Dyadic) -> Dyadic:
    return a if a <= b else b


def dmax(a: Dyadic, b: Dyadic) -> Dyadic:
    return a if a >= b else b
