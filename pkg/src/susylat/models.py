"""Built-in charge assignments."""

from __future__ import annotations

from .car import CarPolynomial, Region, a, adag
from .supercharge import ChargeAssignment


def nicolai() -> ChargeAssignment:
    """Psi({2j-1, 2j, 2j+1}) = a_{2j+1} a*_{2j} a_{2j-1}, repeated with period 2."""
    poly = a(1) * adag(0) * a(-1)
    return ChargeAssignment([(Region([-1, 0, 1]), poly)], declared_range=3, period=(2,), name="nicolai")


def majorana() -> ChargeAssignment:
    """Psi({j}) = a_j + a_j*; nilpotent, since C(I)^2 = |I| is central."""
    return ChargeAssignment([(Region([0]), a(0) + adag(0))], declared_range=0, period=(1,), name="majorana")


def zero(dimension: int = 1) -> ChargeAssignment:
    return ChargeAssignment([], declared_range=0, period=(1,) * dimension, dimension=dimension, name="zero")


def nicolai_2d() -> ChargeAssignment:
    """Nicolai charge along the first axis of a square lattice, one copy per row."""
    poly = a((1, 0)) * adag((0, 0)) * a((-1, 0))
    return ChargeAssignment(
        [(Region([(-1, 0), (0, 0), (1, 0)]), poly)], declared_range=2, period=(2, 1), name="nicolai-2d"
    )


BUILTIN = {"nicolai": nicolai, "majorana": majorana, "zero": zero, "nicolai-2d": nicolai_2d}


def scalar_one() -> CarPolynomial:
    return CarPolynomial.identity()


def nicolai_hermitian() -> ChargeAssignment:
    """Psi + Psi* of the Nicolai charge: odd and hermitian, but delta^2 != 0."""
    q = a(1) * adag(0) * a(-1)
    return ChargeAssignment([(Region([-1, 0, 1]), q + q.adjoint())], declared_range=3, period=(2,), name="nicolai-hermitian")


BUILTIN["nicolai-hermitian"] = nicolai_hermitian
