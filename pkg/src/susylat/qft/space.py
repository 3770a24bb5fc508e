"""Truncated fermion-boson Fock space for the free supersymmetric field.

N fermion and N boson modes sit at momenta p_k = k dp. With
alpha_k(f) = sqrt(dp) fhat(p_k) and beta_k(f) = sqrt(p_k) alpha_k(f):

    c(f) = sum_k alpha_k b_k + conj(alpha_k) b_k*     (fermion factor)
    j(f) = sum_k beta_k d_k + conj(beta_k) d_k*       (boson factor, cutoff M)
    Q_s  = sum_k sqrt(p_k) (b_k* d_k + b_k d_k*)

so <Omega, c(f) c(g) Omega> and <Omega, j(f) j(g) Omega> are Riemann sums of
fer(f, g) and bos(f, g), {Q_s, c(f)} = j(f) exactly and [Q_s, j(f)] = i c(f')
away from the top boson level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import TestFunction

MAX_DIM = 4096


class DimensionError(ValueError):
    pass


def _fermion_ops(n: int) -> list[np.ndarray]:
    """Jordan-Wigner annihilators on 2^n, mode 0 as the most significant factor."""
    sz = np.diag([1.0, -1.0])
    low = np.array([[0.0, 1.0], [0.0, 0.0]])
    out = []
    for k in range(n):
        m = np.ones((1, 1))
        for i in range(n):
            m = np.kron(m, sz if i < k else (low if i == k else np.eye(2)))
        out.append(m)
    return out


def _boson_ops(n: int, cutoff: int) -> list[np.ndarray]:
    d1 = np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)
    eye = np.eye(cutoff + 1)
    out = []
    for k in range(n):
        m = np.ones((1, 1))
        for i in range(n):
            m = np.kron(m, d1 if i == k else eye)
        out.append(m)
    return out


class TruncatedQftSpace:
    def __init__(self, modes: int, cutoff: int, dp: float = 1.0, kappa: float = 1.0, max_dim: int = MAX_DIM):
        if modes < 1 or cutoff < 1:
            raise ValueError("modes and cutoff must be >= 1")
        if dp <= 0:
            raise ValueError("momentum spacing must be positive")
        self.N = modes
        self.M = cutoff
        self.dp = float(dp)
        self.kappa = float(kappa)
        self.dim_f = 2**modes
        self.dim_b = (cutoff + 1) ** modes
        self.dim = self.dim_f * self.dim_b
        if self.dim > max_dim:
            raise DimensionError(f"space dimension {self.dim} = 2^{modes} * {cutoff + 1}^{modes} exceeds {max_dim}")
        self.momenta = self.dp * np.arange(1, modes + 1)
        self._b = _fermion_ops(modes)
        self._d = _boson_ops(modes, cutoff)
        self._if = np.eye(self.dim_f)
        self._ib = np.eye(self.dim_b)
        occ = np.array(np.unravel_index(np.arange(self.dim_b), (cutoff + 1,) * modes)).T
        self.boson_occupation = occ  # (dim_b, N)
        fparity = np.array([(-1) ** bin(i).count("1") for i in range(self.dim_f)], dtype=float)
        self.gamma = np.kron(np.diag(fparity), self._ib)
        self.Q = sum(
            math.sqrt(p) * (np.kron(b.T, d) + np.kron(b, d.T)) for p, b, d in zip(self.momenta, self._b, self._d)
        ).astype(complex)
        self.H = self.Q @ self.Q
        self.omega = np.zeros(self.dim, dtype=complex)
        self.omega[0] = 1.0
        self._cache = {}

    # mode coefficients

    def alpha(self, f: TestFunction) -> np.ndarray:
        key = ("alpha", id(f))
        hit = self._cache.get(key)
        if hit is not None and hit[0] is f:
            return hit[1]
        a = math.sqrt(self.dp) * f.hat(self.momenta, self.kappa)
        self._cache[key] = (f, a)
        return a

    def beta(self, f: TestFunction) -> np.ndarray:
        return np.sqrt(self.momenta) * self.alpha(f)

    # generators

    def c(self, f: TestFunction) -> np.ndarray:
        a = self.alpha(f)
        op = sum(ak * b + np.conj(ak) * b.T for ak, b in zip(a, self._b))
        return np.kron(op, self._ib)

    def j(self, f: TestFunction) -> np.ndarray:
        bt = self.beta(f)
        op = sum(bk * d + np.conj(bk) * d.T for bk, d in zip(bt, self._d))
        return np.kron(self._if, op)

    def R(self, lam: float, f: TestFunction) -> np.ndarray:
        """(i lam - j(f))^-1; regular because j(f) is hermitian and lam is real and nonzero."""
        if lam == 0:
            raise ValueError("resolvent needs a nonzero real lambda")
        bt = self.beta(f)
        jb = sum(bk * d + np.conj(bk) * d.T for bk, d in zip(bt, self._d))
        rb = np.linalg.inv(1j * lam * np.eye(self.dim_b) - jb)
        return np.kron(self._if, rb)

    def zeta(self, f: TestFunction) -> np.ndarray:
        return self.c(f) @ self.R(1.0, f)

    def graded_commutator_Q(self, X: np.ndarray, odd: bool) -> np.ndarray:
        return self.Q @ X - (self.gamma @ X @ self.gamma if odd else X) @ self.Q

    # discretized pairings realized by the space

    def fer(self, f: TestFunction, g: TestFunction) -> complex:
        return complex(np.sum(self.alpha(f) * np.conj(self.alpha(g))))

    def bos(self, f: TestFunction, g: TestFunction) -> complex:
        return complex(np.sum(self.beta(f) * np.conj(self.beta(g))))

    def sigma(self, f: TestFunction, g: TestFunction) -> float:
        """The symplectic constant realized by [j(f), j(g)] = i sigma on low levels."""
        return float(2 * np.imag(self.bos(f, g)))

    def inner(self, f: TestFunction, g: TestFunction) -> float:
        return float(2 * np.real(self.fer(f, g)))

    # subspaces

    def low_occupation(self, m0: int = 1) -> np.ndarray:
        """Indices of basis vectors with every boson occupation <= m0."""
        ok_b = np.all(self.boson_occupation <= m0, axis=1)
        return np.flatnonzero(np.tile(ok_b, self.dim_f))

    def below_shell(self) -> np.ndarray:
        """Indices where every mode has n_b + n_d <= M; this subspace is invariant under Q_s."""
        fb = np.array([[(i >> (self.N - 1 - k)) & 1 for k in range(self.N)] for i in range(self.dim_f)])
        tot = fb[:, None, :] + self.boson_occupation[None, :, :]
        return np.flatnonzero(np.all(tot <= self.M, axis=2).ravel())

    def expect(self, X: np.ndarray) -> complex:
        return complex(self.omega.conj() @ X @ self.omega)


def build_space(modes: int, cutoff: int, dp: float = 1.0, kappa: float = 1.0, max_dim: int = MAX_DIM) -> TruncatedQftSpace:
    return TruncatedQftSpace(modes, cutoff, dp, kappa, max_dim)


def restricted_norm(X: np.ndarray, cols: np.ndarray) -> float:
    """Operator norm of X restricted to the span of the given basis vectors."""
    if X.size == 0 or len(cols) == 0:
        return 0.0
    return float(np.linalg.norm(X[:, cols], 2))


@dataclass
class ShellSpectrum:
    kernel_even: int
    kernel_odd: int
    doublets_paired: bool
    min_eigenvalue: float
    q_residual: float
    levels: list

    def to_dict(self) -> dict:
        return {
            "kernel_even": self.kernel_even,
            "kernel_odd": self.kernel_odd,
            "doublets_paired": self.doublets_paired,
            "min_eigenvalue": self.min_eigenvalue,
            "Q_omega": self.q_residual,
            "levels": self.levels,
        }


def shell_spectrum(space: TruncatedQftSpace, tol: float = 1e-9) -> ShellSpectrum:
    """Spectrum of Q_s^2 below the cutoff shell, sector by sector, with the Q_s pairing ranks."""
    idx = space.below_shell()
    Q = space.Q[np.ix_(idx, idx)]
    g = np.real(np.diag(space.gamma))[idx]
    H = Q @ Q
    ev, od = np.flatnonzero(g > 0), np.flatnonzero(g < 0)
    we, ve = np.linalg.eigh(H[np.ix_(ev, ev)])
    wo, vo = np.linalg.eigh(H[np.ix_(od, od)])
    levels = []
    ok = True
    energies = np.unique(np.round(np.concatenate([we, wo]) / tol) * tol)
    for e in energies:
        if abs(e) <= tol:
            continue
        se = ve[:, np.abs(we - e) <= tol]
        so = vo[:, np.abs(wo - e) <= tol]
        block = Q[np.ix_(od, ev)]
        rank = np.linalg.matrix_rank(so.conj().T @ block @ se, tol=1e-8) if se.size and so.size else 0
        paired = se.shape[1] == so.shape[1] == rank
        ok &= paired
        levels.append({"energy": float(e), "even": int(se.shape[1]), "odd": int(so.shape[1]), "q_rank": int(rank)})
    return ShellSpectrum(
        int(np.sum(np.abs(we) <= tol)),
        int(np.sum(np.abs(wo) <= tol)),
        bool(ok),
        float(min(we.min(initial=np.inf), wo.min(initial=np.inf))),
        float(np.linalg.norm(space.Q @ space.omega)),
        levels,
    )
