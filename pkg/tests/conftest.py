import functools

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from susylat.car import CarPolynomial, a, adag
from susylat.exact import GaussRational

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SITES = [0, 1, 2]

gauss = st.builds(GaussRational, st.integers(-4, 4), st.integers(-4, 4), st.integers(1, 3))

letters = st.tuples(st.sampled_from("+-"), st.sampled_from(SITES))
words = st.lists(letters, min_size=0, max_size=4)


@st.composite
def polynomials(draw, max_terms=3, sites=SITES):
    """Random sums of coefficient * (ordered product of creators and annihilators)."""
    out = CarPolynomial.zero()
    for _ in range(draw(st.integers(0, max_terms))):
        c = draw(gauss)
        w = draw(st.lists(st.tuples(st.sampled_from("+-"), st.sampled_from(sites)), max_size=4))
        term = CarPolynomial.scalar(c)
        for kind, s in w:
            term = term * (adag(s) if kind == "+" else a(s))
        out = out + term
    return out


# Jordan-Wigner matrices built from Pauli factors, independently of susylat.jw.
# Site k is bit k of the basis index; np.kron puts the last site first.

_Z = np.diag([1.0, -1.0])
_LOW = np.array([[0.0, 1.0], [0.0, 0.0]])
_I2 = np.eye(2)


@functools.lru_cache(maxsize=None)
def pauli_annihilator(k: int, n: int) -> np.ndarray:
    m = np.ones((1, 1))
    for j in reversed(range(n)):
        m = np.kron(m, _Z if j < k else (_LOW if j == k else _I2))
    return m


def pauli_matrix(p: CarPolynomial, sites: list) -> np.ndarray:
    """Matrix of p from its canonical monomials, each a product of Pauli strings."""
    n = len(sites)
    pos = {s: i for i, s in enumerate(sites)}
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for (cs, ans), coef in p.terms.items():
        m = np.eye(1 << n, dtype=complex)
        for s in cs:
            m = m @ pauli_annihilator(pos[s], n).T
        for s in ans:
            m = m @ pauli_annihilator(pos[s], n)
        out += complex(coef) * m
    return out


def word_matrix(word, sites: list) -> np.ndarray:
    n = len(sites)
    pos = {(s,): i for i, s in enumerate(sites)}
    m = np.eye(1 << n, dtype=complex)
    for kind, s in word:
        op = pauli_annihilator(pos[(s,)], n)
        m = m @ (op.T if kind == "+" else op)
    return m
