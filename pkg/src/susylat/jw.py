"""Jordan-Wigner matrices for CAR polynomials on a finite region.

Basis states are bitmasks: bit k is the occupation of the k-th site of the
region in lexicographic order, and a_k picks up the sign (-1)^(number of
occupied sites before k).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .car import CarPolynomial, Monomial, Region

DENSE_NORM_LIMIT = 12
MAX_SITES = 22


def popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(x, dtype=np.int64)).astype(np.int64)


class SiteIndex:
    """Fixed ordering of the sites of a region."""

    def __init__(self, region: Region):
        if len(region) > MAX_SITES:
            raise ValueError(f"region has {len(region)} sites; matrix backend limit is {MAX_SITES}")
        self.region = region
        self.sites = region.sorted()
        self.index = {s: k for k, s in enumerate(self.sites)}
        self.n = len(self.sites)
        self.dim = 1 << self.n

    def mask(self, sites) -> int:
        m = 0
        for s in sites:
            try:
                m |= 1 << self.index[s]
            except KeyError:
                raise ValueError(f"site {s} lies outside the region {self.region!r}") from None
        return m

    def jw_exponent(self, sites, states: np.ndarray) -> np.ndarray:
        """Sum over the given sites of the number of occupied sites below each one."""
        out = np.zeros_like(states)
        for s in sites:
            k = self.index[s]
            out += popcount(states & ((1 << k) - 1))
        return out

    def apply_monomial(self, m: Monomial, states: np.ndarray):
        """Action of a canonical monomial on basis states.

        Returns (valid, new_states, signs) where invalid states are annihilated.
        """
        creators, annihilators = m
        cmask = self.mask(creators)
        amask = self.mask(annihilators)
        states = np.asarray(states, dtype=np.int64)
        s1 = states & ~amask
        valid = ((states & amask) == amask) & ((s1 & cmask) == 0)
        expo = self.jw_exponent(annihilators, states) + self.jw_exponent(creators, s1)
        signs = 1 - 2 * (expo & 1)
        return valid, s1 | cmask, signs


def represent(p: CarPolynomial, region: Region | SiteIndex | None = None) -> sp.csr_matrix:
    """Sparse Jordan-Wigner matrix of p on the region (default: its support)."""
    idx = region if isinstance(region, SiteIndex) else SiteIndex(region if region is not None else p.support())
    states = np.arange(idx.dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    for m, c in p.terms.items():
        valid, new, signs = idx.apply_monomial(m, states)
        cols.append(states[valid])
        rows.append(new[valid])
        vals.append(signs[valid] * complex(c))
    if rows:
        r = np.concatenate(rows)
        cidx = np.concatenate(cols)
        v = np.concatenate(vals)
    else:
        r = cidx = np.zeros(0, dtype=np.int64)
        v = np.zeros(0, dtype=complex)
    mat = sp.coo_matrix((v, (r, cidx)), shape=(idx.dim, idx.dim)).tocsr()
    mat.sum_duplicates()
    return mat


def spectral_norm(mat) -> float:
    """Largest singular value of a (sparse or dense) matrix."""
    if sp.issparse(mat):
        if mat.nnz == 0:
            return 0.0
        if mat.shape[0] <= 1 << DENSE_NORM_LIMIT:
            mat = mat.toarray()
        else:
            ata = (mat.conj().T @ mat).tocsr()
            val = spla.eigsh(ata, k=1, which="LA", return_eigenvectors=False, tol=1e-12)
            return float(np.sqrt(max(val[0], 0.0)))
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0.0
    return float(np.linalg.norm(mat, 2))


def operator_norm(p: CarPolynomial) -> float:
    """C*-norm of a local element: spectral norm of its matrix on its own support."""
    if p.is_zero():
        return 0.0
    if p.is_scalar():
        return abs(p.constant_term())
    return spectral_norm(represent(p, p.support()))


def norm_upper_bound(p: CarPolynomial, exact_limit: int = DENSE_NORM_LIMIT) -> tuple[float, bool]:
    """(value, exact): the exact norm on small supports, else the coefficient l1 bound."""
    if len(p.support()) <= exact_limit:
        return operator_norm(p), True
    return p.l1_norm(), False


def parity_diagonal(idx: SiteIndex) -> np.ndarray:
    """Diagonal of (-1)^N in the occupation basis."""
    return 1 - 2 * (popcount(np.arange(idx.dim, dtype=np.int64)) & 1)


def apply_masks(idx: SiteIndex, cmasks: np.ndarray, amasks: np.ndarray, states: np.ndarray):
    """Vectorized action of many canonical monomials, given as bit masks, on states.

    All arrays broadcast together; returns (valid, new_states, signs).
    """
    cmasks = np.asarray(cmasks, dtype=np.int64)
    amasks = np.asarray(amasks, dtype=np.int64)
    states = np.asarray(states, dtype=np.int64)
    s1 = states & ~amasks
    valid = ((states & amasks) == amasks) & ((s1 & cmasks) == 0)
    expo = np.zeros(np.broadcast(cmasks, amasks, states).shape, dtype=np.int64)
    for k in range(idx.n):
        below = (1 << k) - 1
        expo += ((amasks >> k) & 1) * popcount(states & below)
        expo += ((cmasks >> k) & 1) * popcount(s1 & below)
    return valid, s1 | cmasks, 1 - 2 * (expo & 1)


def adjoint_sign(cmasks: np.ndarray, amasks: np.ndarray) -> np.ndarray:
    """Sign relating m* to the canonical monomial with creators and annihilators swapped."""
    p = popcount(cmasks)
    q = popcount(amasks)
    return 1 - 2 * (((p * (p - 1)) // 2 + (q * (q - 1)) // 2) & 1)


def embed_masks(small: np.ndarray, positions: list[int]) -> np.ndarray:
    """Map masks over k local bits to masks over the given bit positions."""
    small = np.asarray(small, dtype=np.int64)
    out = np.zeros_like(small)
    for k, pos in enumerate(positions):
        out |= ((small >> k) & 1) << pos
    return out
