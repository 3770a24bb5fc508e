import math

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import pauli_matrix, polynomials
from susylat.car import CarPolynomial, Region, a, adag
from susylat.models import majorana, nicolai, nicolai_2d, nicolai_hermitian, zero
from susylat.supercharge import (
    AssignmentError,
    ChargeAssignment,
    NotNilpotentError,
    apply_delta,
    apply_delta0,
    apply_delta0_pairs,
    apply_delta0_symmetric,
    apply_delta_star,
    check_nilpotent,
    lattice_constants,
    norm_constants,
    pair_formula,
)

PSI = nicolai()


def test_nicolai_charge_on_a_window():
    c = PSI.local_charge(Region.interval(0, 1))
    assert c == a(1) * adag(0) * a(-1) + a(3) * adag(2) * a(1)


def test_nicolai_is_nilpotent_exactly():
    rep = check_nilpotent(PSI)
    assert rep.nilpotent and rep.exact and rep.pair_formula_agrees
    assert rep.checked == 8  # a and a* on the four sites of two periods


def test_nicolai_open_charge_squares_to_zero_in_pauli_oracle():
    sites = [(s,) for s in range(-3, 5)]
    c = PSI.open_charge(Region.interval(-3, 4))
    q = pauli_matrix(c, sites)
    assert np.abs(q).max() > 0
    assert np.abs(q @ q).max() == 0


def test_hermitian_nicolai_fails_with_counterexample():
    rep = check_nilpotent(nicolai_hermitian())
    assert not rep.nilpotent
    assert rep.counterexample is not None and not rep.delta_squared.is_zero()
    # independent check: C^2 does not commute with the counterexample
    sites = [(s,) for s in range(-4, 5)]
    c = nicolai_hermitian().local_charge(Region.interval(-1, 1))
    g = rep.counterexample
    cm, gm = pauli_matrix(c, sites), pauli_matrix(g, sites)
    h = cm @ cm
    assert np.abs(h @ gm - gm @ h).max() > 0.5


def test_majorana_and_zero_are_nilpotent():
    assert check_nilpotent(majorana()).nilpotent
    assert check_nilpotent(zero()).nilpotent
    assert check_nilpotent(nicolai_2d()).nilpotent


def test_delta0_refuses_non_nilpotent():
    with pytest.raises(NotNilpotentError):
        apply_delta0(nicolai_hermitian(), a(0))


def test_even_pattern_rejected():
    with pytest.raises(AssignmentError):
        ChargeAssignment([(Region([0]), adag(0) * a(0))], declared_range=1, period=(1,))


def test_pattern_outside_range_rejected():
    with pytest.raises(AssignmentError):
        ChargeAssignment([(Region([0, 5]), a(0) * a(5) * adag(5))], declared_range=3, period=(6,))


@settings(max_examples=40)
@given(polynomials(sites=[-1, 0, 1, 2]), polynomials(sites=[-1, 0, 1, 2]))
def test_graded_leibniz(f, g):
    for d in (apply_delta, apply_delta_star):
        assert d(PSI, f * g) == d(PSI, f) * g + f.gamma() * d(PSI, g)


@settings(max_examples=40)
@given(polynomials(sites=[0, 1]))
def test_delta_is_odd_and_star_is_conjugate(f):
    d = apply_delta(PSI, f)
    assert apply_delta(PSI, f.gamma()) == -d.gamma()
    # delta*(F) = -(delta(gamma(F)*))*
    assert apply_delta_star(PSI, f) == -apply_delta(PSI, f.gamma().adjoint()).adjoint()


@settings(max_examples=25)
@given(polynomials(sites=[0, 1], max_terms=2))
def test_delta_squared_vanishes_and_pair_formula(f):
    assert apply_delta(PSI, apply_delta(PSI, f)).is_zero()
    s1, _ = PSI.symmetrize()
    assert apply_delta0_symmetric(s1, f) == apply_delta0_pairs(s1, f)


def test_delta0_sum_of_symmetric_halves():
    s1, s2 = PSI.symmetrize()
    A = adag(0) * a(1)
    lhs = apply_delta0(PSI, A).scale(2)
    assert lhs == apply_delta0_symmetric(s1, A) + apply_delta0_symmetric(s2, A)


def test_pair_formula_matches_for_hermitian_variant():
    # delta^2 of any odd assignment equals the overlapping-pair commutator
    psi = nicolai_hermitian()
    g = a(0)
    assert apply_delta(psi, apply_delta(psi, g)) == pair_formula(psi, g)


def _nicolai_L_by_counting():
    # Psi_s(X_c) on X_c = {c-1, c, c+1}, c even; its norm from the Pauli oracle
    sites = [(-1,), (0,), (1,)]
    q = a(1) * adag(0) * a(-1)
    norm = np.linalg.norm(pauli_matrix(q + q.adjoint(), sites), 2)
    best = 0.0
    for i in (0, 1):
        total = 0.0
        for c in range(i - 1, i + 2):
            if c % 2:
                continue
            meeting = [d for d in range(c - 4, c + 5) if d % 2 == 0 and abs(d - c) <= 2]
            total += norm * norm * len(meeting)
        best = max(best, total)
    return best


def test_norm_constants_of_nicolai():
    k = norm_constants(PSI.symmetrize()[0])
    assert k.L == pytest.approx(_nicolai_L_by_counting())
    assert k.L == pytest.approx(6.0)
    assert k.log_M == pytest.approx(8 * 3 * k.L)
    assert k.t0 == pytest.approx(math.exp(-144.0))
    assert lattice_constants(PSI).L == pytest.approx(6.0)


def test_zero_assignment_is_trivial():
    psi = zero()
    assert apply_delta(psi, a(0) * adag(3)).is_zero()
    assert norm_constants(psi).L == 0.0
    assert psi.local_charge(Region.interval(0, 4)) == CarPolynomial.zero()
