from fractions import Fraction

import pytest
from hypothesis import given

from conftest import gauss
from susylat.exact import GaussRational, coerce, parse_number


def as_pair(x):
    return (x.real, x.imag)


@given(gauss, gauss, gauss)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x - x == GaussRational(0)
    if x != 0:
        assert (y / x) * x == y


@given(gauss, gauss)
def test_agrees_with_fraction_arithmetic(x, y):
    a, b = as_pair(x)
    c, d = as_pair(y)
    assert as_pair(x * y) == (a * c - b * d, a * d + b * c)
    assert as_pair(x + y) == (a + c, b + d)
    assert as_pair(x.conjugate()) == (a, -b)


@given(gauss)
def test_reduced_and_hashable(x):
    y = GaussRational(x.re * 6, x.im * 6, x.den * 6)
    assert y == x and hash(y) == hash(x) and y.den == x.den


def test_float_escape_hatch():
    assert coerce(0.5) == 0.5 + 0j
    assert isinstance(GaussRational(1, 1) * 0.5, complex)
    assert complex(GaussRational(1, -2, 4)) == 0.25 - 0.5j


def test_parse_number_is_exact():
    assert parse_number("1.25") == GaussRational(5, 0, 4)
    assert parse_number("3/4").real == Fraction(3, 4)


def test_zero_division():
    with pytest.raises(ZeroDivisionError):
        GaussRational(1) / GaussRational(0)
    with pytest.raises(ZeroDivisionError):
        GaussRational(1, 0, 0)
