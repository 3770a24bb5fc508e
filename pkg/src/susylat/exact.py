"""Exact Gaussian-rational scalars with a complex-float escape hatch."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Complex, Rational


class GaussRational:
    """Number (re + i*im) / den with integer re, im and positive den, kept reduced."""

    __slots__ = ("re", "im", "den")

    def __init__(self, re: int = 0, im: int = 0, den: int = 1):
        if den <= 0:
            if den == 0:
                raise ZeroDivisionError("zero denominator")
            re, im, den = -re, -im, -den
        if den != 1:
            g = math.gcd(math.gcd(re, im), den)
            if g != 1:
                re //= g
                im //= g
                den //= g
        self.re = re
        self.im = im
        self.den = den

    @classmethod
    def coerce(cls, x) -> "GaussRational | complex":
        """Exact conversion when possible; floats come back as complex."""
        if isinstance(x, GaussRational):
            return x
        if isinstance(x, bool):
            return cls(int(x))
        if isinstance(x, int):
            return cls(x)
        if isinstance(x, Fraction):
            return cls(x.numerator, 0, x.denominator)
        if isinstance(x, Rational):
            return cls(int(x.numerator), 0, int(x.denominator))
        if isinstance(x, (float, complex, Complex)):
            return complex(x)
        raise TypeError(f"cannot use {type(x).__name__} as a coefficient")

    @classmethod
    def from_fractions(cls, re: Fraction, im: Fraction = Fraction(0)) -> "GaussRational":
        re, im = Fraction(re), Fraction(im)
        d = re.denominator * im.denominator // math.gcd(re.denominator, im.denominator)
        return cls(re.numerator * (d // re.denominator), im.numerator * (d // im.denominator), d)

    @property
    def real(self) -> Fraction:
        return Fraction(self.re, self.den)

    @property
    def imag(self) -> Fraction:
        return Fraction(self.im, self.den)

    def conjugate(self) -> "GaussRational":
        return GaussRational(self.re, -self.im, self.den)

    def __complex__(self) -> complex:
        return complex(self.re / self.den, self.im / self.den)

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(Fraction(self.re, self.den))
        return hash((self.re, self.im, self.den))

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussRational):
            return self.re == other.re and self.im == other.im and self.den == other.den
        try:
            o = GaussRational.coerce(other)
        except TypeError:
            return NotImplemented
        if isinstance(o, complex):
            return complex(self) == o
        return self == o

    def __repr__(self) -> str:
        return f"GaussRational({self})"

    def __str__(self) -> str:
        re, im = self.real, self.imag
        if im == 0:
            return str(re)
        if re == 0:
            return f"{im}i"
        sign = "+" if im > 0 else "-"
        return f"({re}{sign}{abs(im)}i)"

    def __neg__(self) -> "GaussRational":
        return GaussRational(-self.re, -self.im, self.den)

    def __pos__(self) -> "GaussRational":
        return self

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im) / self.den

    def __add__(self, other):
        if not isinstance(other, GaussRational):
            other = GaussRational.coerce(other)
            if isinstance(other, complex):
                return complex(self) + other
        a, b, d = self.re, self.im, self.den
        c, e, f = other.re, other.im, other.den
        if d == f:
            return GaussRational(a + c, b + e, d)
        return GaussRational(a * f + c * d, b * f + e * d, d * f)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, GaussRational):
            other = GaussRational.coerce(other)
            if isinstance(other, complex):
                return complex(self) * other
        a, b, d = self.re, self.im, self.den
        c, e, f = other.re, other.im, other.den
        return GaussRational(a * c - b * e, a * e + b * c, d * f)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, GaussRational):
            other = GaussRational.coerce(other)
            if isinstance(other, complex):
                return complex(self) / other
        c, e, f = other.re, other.im, other.den
        n = c * c + e * e
        if n == 0:
            raise ZeroDivisionError("division by zero")
        # 1/((c+ie)/f) = f (c - ie) / n
        return self * GaussRational(f * c, -f * e, n)

    def __rtruediv__(self, other):
        o = GaussRational.coerce(other)
        if isinstance(o, complex):
            return o / complex(self)
        return o / self


I = GaussRational(0, 1)
ONE = GaussRational(1)
ZERO = GaussRational(0)


def coerce(x):
    return GaussRational.coerce(x)


def is_exact(x) -> bool:
    return isinstance(x, GaussRational)


def to_complex(x) -> complex:
    return complex(x)


def parse_number(text: str) -> GaussRational:
    """Exact value of a decimal or fraction literal such as '1.25' or '3/4'."""
    return GaussRational.coerce(Fraction(text))
