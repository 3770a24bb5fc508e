import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SITES, gauss, polynomials, pauli_matrix, word_matrix, words
from susylat.car import (
    CarPolynomial,
    Region,
    a,
    adag,
    graded_commutator,
    monomial,
    monomial_basis,
    multi_commutator,
    normalize,
    translate,
)
from susylat.exact import GaussRational
from susylat.jw import norm_upper_bound, operator_norm, represent
from susylat.modelfile import parse_polynomial

REGION = Region.interval(0, 2)
TUPLES = [(s,) for s in SITES]


def mat(p):
    return represent(p, REGION).toarray()


def test_canonical_anticommutation_relations():
    for i in SITES:
        for j in SITES:
            assert a(i) * a(j) + a(j) * a(i) == CarPolynomial.zero()
            assert adag(i) * adag(j) + adag(j) * adag(i) == CarPolynomial.zero()
            expected = CarPolynomial.identity() if i == j else CarPolynomial.zero()
            assert a(i) * adag(j) + adag(j) * a(i) == expected


def test_normal_order_sign():
    # a(0) a+(0) = 1 - a+(0) a(0); a(1) a(0) = -a(0) a(1) in canonical order
    assert a(0) * adag(0) == CarPolynomial.identity() - adag(0) * a(0)
    assert a(1) * a(0) == -(a(0) * a(1))
    assert str(a(1) * a(0)) == "-a(0) a(1)"


def test_monomial_basis_size():
    assert len(list(monomial_basis(REGION))) == 4**3


@given(words)
def test_normal_form_matches_pauli_oracle(word):
    p = normalize(word)
    assert np.allclose(mat(p), word_matrix(word, SITES))
    assert np.allclose(pauli_matrix(p, TUPLES), word_matrix(word, SITES))


@given(polynomials(), polynomials())
def test_product_is_a_homomorphism(p, q):
    assert np.allclose(mat(p * q), mat(p) @ mat(q))


@given(polynomials(), polynomials(), polynomials(max_terms=2))
def test_associativity(p, q, r):
    assert (p * q) * r == p * (q * r)


@given(polynomials(), polynomials(), polynomials())
def test_distributivity(p, q, r):
    assert p * (q + r) == p * q + p * r


@given(polynomials(), polynomials())
def test_adjoint_is_antilinear_antimultiplicative(p, q):
    assert (p * q).adjoint() == q.adjoint() * p.adjoint()
    assert p.adjoint().adjoint() == p
    assert np.allclose(mat(p.adjoint()), mat(p).conj().T)


@given(polynomials(), polynomials())
def test_grading_is_an_automorphism(p, q):
    assert (p * q).gamma() == p.gamma() * q.gamma()
    assert p.gamma().gamma() == p
    assert p.even_part() + p.odd_part() == p
    assert p.even_part().gamma() == p.even_part()
    assert p.odd_part().gamma() == -p.odd_part()


@given(polynomials(), polynomials())
def test_graded_commutator_matches_definition(f, g):
    fe, fo, ge, go = f.even_part(), f.odd_part(), g.even_part(), g.odd_part()
    expected = fe * g - g * fe + fo * ge - ge * fo + fo * go + go * fo
    assert graded_commutator(f, g) == expected


@given(polynomials(max_terms=2), polynomials(max_terms=2), polynomials(max_terms=2))
def test_graded_jacobi_for_odd_elements(x, y, z):
    x, y, z = x.odd_part(), y.odd_part(), z.odd_part()
    lhs = graded_commutator(x, graded_commutator(y, z))
    rhs = graded_commutator(graded_commutator(x, y), z) - graded_commutator(y, graded_commutator(x, z))
    assert lhs == rhs


def test_multi_commutator_nests_from_the_right():
    f, g, h = a(0), adag(1), a(2) * adag(0)
    assert multi_commutator([f, g], h) == graded_commutator(f, graded_commutator(g, h))


@given(gauss, gauss)
def test_scalars_are_exact(x, y):
    p = CarPolynomial.scalar(x) * adag(0) + CarPolynomial.scalar(y) * adag(0)
    assert p == CarPolynomial.scalar(x + y) * adag(0)
    assert p.is_exact()


def test_float_coefficients_are_allowed_and_inexact():
    p = a(0).scale(0.5j)
    assert not p.is_exact()
    assert np.allclose(mat(p), 0.5j * mat(a(0)))


def test_non_canonical_monomial_rejected():
    with pytest.raises(ValueError):
        CarPolynomial({(((1,), (0,)), ()): GaussRational(1)})


def test_monomial_helper_sorts_with_sign():
    assert monomial([1, 0]) == -monomial([0, 1])


@given(polynomials())
def test_support_parity_and_translation(p):
    q = translate(p, (3,))
    assert q.support() == p.support().translate((3,))
    assert translate(q, (-3,)) == p
    assert p.parity() in (None, 0, 1)


@given(polynomials())
def test_string_form_parses_back(p):
    assert parse_polynomial(str(p)) == p


def test_operator_norms():
    assert operator_norm(a(0)) == pytest.approx(1.0)
    assert operator_norm(adag(0) * a(0)) == pytest.approx(1.0)
    assert operator_norm(a(0) + adag(0)) == pytest.approx(1.0)
    p = a(0) * adag(1) + adag(1) * a(0)
    val, exact = norm_upper_bound(p)
    assert exact and val == pytest.approx(operator_norm(p))


@given(polynomials())
def test_l1_bound_dominates_norm(p):
    assert operator_norm(p) <= p.l1_norm() + 1e-12


def test_regions():
    r = Region.interval(-1, 1)
    assert len(r) == 3 and r.diameter() == 2
    assert r.enlarge(1) == Region.interval(-2, 2)
    assert Region.cube(1, 2).dimension == 2 and len(Region.cube(1, 2)) == 9
    assert r.intersects(Region.interval(1, 4)) and not r.intersects(Region.interval(2, 4))
