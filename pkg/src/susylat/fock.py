"""Finite-volume Fock representations and the supersymmetry checks built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import expm_multiply

from . import jw
from .car import CarPolynomial, Region, monomial_basis
from .exact import GaussRational
from .jw import SiteIndex, apply_masks, adjoint_sign, embed_masks, popcount, spectral_norm
from .sampling import random_polynomial
from .supercharge import ChargeAssignment, apply_delta_region


class FockRepresentation:
    """Jordan-Wigner representation of the CAR algebra of a finite region.

    ``reference`` selects the cyclic vector: 'fock' (all empty) or 'antifock'
    (all filled).  The grading operator is normalized so that Gamma Omega = Omega.
    """

    def __init__(self, region: Region, reference: str = "fock"):
        if reference not in ("fock", "antifock"):
            raise ValueError("reference must be 'fock' or 'antifock'")
        self.region = region
        self.index = SiteIndex(region)
        self.dim = self.index.dim
        self.reference = reference
        self.vacuum_index = 0 if reference == "fock" else self.dim - 1
        sign = 1 if reference == "fock" or len(region) % 2 == 0 else -1
        self.parity = jw.parity_diagonal(self.index)
        self.gamma_diag = sign * self.parity

    def represent(self, p: CarPolynomial) -> sp.csr_matrix:
        if not p.support().issubset(self.region):
            raise ValueError(f"support {p.support()!r} exceeds the representation region {self.region!r}")
        return jw.represent(p, self.index)

    def annihilator(self, s) -> sp.csr_matrix:
        from .car import a

        return self.represent(a(s))

    def creator(self, s) -> sp.csr_matrix:
        from .car import adag

        return self.represent(adag(s))

    @property
    def gamma(self) -> sp.dia_matrix:
        return sp.diags(self.gamma_diag.astype(complex))

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.vacuum_index] = 1.0
        return v

    def basis_index(self, occupied) -> int:
        from .car import site

        return self.index.mask([site(s) for s in occupied])

    def basis_vector(self, occupied) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.basis_index(occupied)] = 1.0
        return v

    def projections(self) -> tuple[sp.dia_matrix, sp.dia_matrix]:
        g = self.gamma_diag
        return sp.diags((1 + g) / 2.0), sp.diags((1 - g) / 2.0)


def operator_norm(p: CarPolynomial) -> float:
    return jw.operator_norm(p)


def represent(rep: FockRepresentation, p: CarPolynomial) -> sp.csr_matrix:
    return rep.represent(p)


# supersymmetric operators

@dataclass
class SusyOperators:
    rep: FockRepresentation
    charge: CarPolynomial
    Q: sp.csr_matrix
    Qd: sp.csr_matrix
    Qs1: sp.csr_matrix
    Qs2: sp.csr_matrix
    H: sp.csr_matrix
    boundary: str
    _blocks: list | None = field(default=None, repr=False)

    @property
    def gamma(self):
        return self.rep.gamma


def build_susy_operators(rep: FockRepresentation, psi: ChargeAssignment, boundary: str = "open", region: Region | None = None) -> SusyOperators:
    """Q = pi(C), with C the sum of Psi(X) over X inside the region ('open')
    or over X meeting it ('meets'; the representation must then contain the
    enlarged region)."""
    region = rep.region if region is None else region
    if boundary == "open":
        c = psi.open_charge(region)
    elif boundary == "meets":
        c = psi.local_charge(region)
    else:
        raise ValueError("boundary must be 'open' or 'meets'")
    Q = rep.represent(c)
    Qd = Q.conj().T.tocsr()
    Qs1 = (Q + Qd).tocsr()
    Qs2 = (1j * (Q - Qd)).tocsr()
    H = (Qs1 @ Qs1).tocsr()
    for m in (Q, Qd, Qs1, Qs2, H):
        m.eliminate_zeros()
    return SusyOperators(rep, c, Q, Qd, Qs1, Qs2, H, boundary)


def _residual(m) -> float:
    if sp.issparse(m):
        m = m.tocsr()
        m.eliminate_zeros()
        if m.nnz == 0:
            return 0.0
        if m.shape[0] > 1 << jw.DENSE_NORM_LIMIT:
            # Frobenius norm bounds the spectral norm from above
            return float(np.sqrt(np.sum(np.abs(m.data) ** 2)))
    return spectral_norm(m)


def hamiltonian_norm(ops: SusyOperators) -> float:
    blocks = eigensystem(ops)
    vals = [np.max(np.abs(e)) for b in blocks for e in (b.evals_even, b.evals_odd) if len(e)]
    return float(max(vals, default=0.0))


def susy_algebra_residuals(ops: SusyOperators) -> dict:
    """Norms of the defects of the realized supersymmetry algebra."""
    Q, Qd, Qs1, Qs2, H = ops.Q, ops.Qd, ops.Qs1, ops.Qs2, ops.H
    G = ops.gamma
    out = {
        "Q^2": _residual(Q @ Q),
        "H-(QQ*+Q*Q)": _residual(H - (Q @ Qd + Qd @ Q)),
        "H-Qs2^2": _residual(H - Qs2 @ Qs2),
        "H-H*": _residual(H - H.conj().T),
        "[H,Q]": _residual(H @ Q - Q @ H),
        "[H,Q*]": _residual(H @ Qd - Qd @ H),
        "[H,Qs1]": _residual(H @ Qs1 - Qs1 @ H),
        "[H,Qs2]": _residual(H @ Qs2 - Qs2 @ H),
        "Gamma Qs1 Gamma+Qs1": _residual(G @ Qs1 @ G + Qs1),
        "Gamma Qs2 Gamma+Qs2": _residual(G @ Qs2 @ G + Qs2),
        "Qs1Qs2+Qs2Qs1": _residual(Qs1 @ Qs2 + Qs2 @ Qs1),
    }
    P_plus, P_minus = ops.rep.projections()
    out["P+ Qs1 P+"] = _residual(P_plus @ Qs1 @ P_plus)
    out["P- Qs1 P-"] = _residual(P_minus @ Qs1 @ P_minus)
    return out


# spectra

@dataclass
class SpectralBlock:
    even: np.ndarray
    odd: np.ndarray
    evals_even: np.ndarray
    evecs_even: np.ndarray
    evals_odd: np.ndarray
    evecs_odd: np.ndarray


def eigensystem(ops: SusyOperators) -> list[SpectralBlock]:
    """Exact diagonalization block by block.

    Blocks are the connected components of the graph of H and Q_s,1, so each
    block is invariant under H, Q_s,1 and Gamma; H is diagonalized separately
    in the two parity sectors of every block.
    """
    if ops._blocks is not None:
        return ops._blocks
    adj = (abs(ops.H) + abs(ops.Qs1) + abs(ops.Qs2)).tocsr()
    _, labels = connected_components(adj, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.flatnonzero(np.diff(labels[order])) + 1
    g = ops.rep.gamma_diag
    blocks = []
    for idx in np.split(order, bounds):
        even = idx[g[idx] > 0]
        odd = idx[g[idx] < 0]
        parts = []
        for sub in (even, odd):
            if len(sub) == 0:
                parts.append((np.zeros(0), np.zeros((0, 0), dtype=complex)))
                continue
            h = ops.H[sub][:, sub].toarray()
            w, v = np.linalg.eigh(h)
            parts.append((w, v))
        blocks.append(SpectralBlock(even, odd, parts[0][0], parts[0][1], parts[1][0], parts[1][1]))
    ops._blocks = blocks
    return blocks


def _clusters(vals: np.ndarray, tol: float) -> list[np.ndarray]:
    if len(vals) == 0:
        return []
    order = np.argsort(vals)
    groups = [[order[0]]]
    for i in order[1:]:
        if vals[i] - vals[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.array(gp) for gp in groups]


def spectral_report(ops: SusyOperators, zero_rel: float = 1e-10, pair_tol: float = 1e-8) -> dict:
    """Eigenvalues, parity-resolved kernel, Witten index and doublet pairing."""
    herm = _residual(ops.H - ops.H.conj().T)
    blocks = eigensystem(ops)
    all_vals = np.concatenate([np.concatenate([b.evals_even, b.evals_odd]) for b in blocks]) if blocks else np.zeros(0)
    norm_h = float(np.max(np.abs(all_vals))) if len(all_vals) else 0.0
    if herm > 1e-12 * max(norm_h, 1.0):
        raise ValueError(f"H is not hermitian (defect {herm:.3e})")
    zero_tol = zero_rel * norm_h
    ker_even = sum(int(np.sum(np.abs(b.evals_even) <= zero_tol)) for b in blocks)
    ker_odd = sum(int(np.sum(np.abs(b.evals_odd) <= zero_tol)) for b in blocks)
    pos_tol = pair_tol * norm_h
    doublets: dict = {}
    pairing_ok = True
    multiplicity_ok = True
    max_sv_dev = 0.0
    Qs1 = ops.Qs1
    Q = ops.Q
    for b in blocks:
        pe = b.evals_even > pos_tol
        po = b.evals_odd > pos_tol
        ve, vo = b.evals_even[pe], b.evals_odd[po]
        if len(ve) != len(vo) or (len(ve) and np.max(np.abs(np.sort(ve) - np.sort(vo))) > pos_tol):
            multiplicity_ok = False
            pairing_ok = False
            continue
        if len(vo) == 0:
            continue
        q_eo = Qs1[b.even][:, b.odd].toarray()
        q_plain = Q[b.even][:, b.odd].toarray()
        qd_plain = ops.Qd[b.even][:, b.odd].toarray()
        Ve_all, Vo_all = b.evecs_even[:, pe], b.evecs_odd[:, po]
        for grp in _clusters(vo, max(pos_tol, 1e-9 * norm_h)):
            lam = float(np.mean(vo[grp]))
            Vo = Vo_all[:, grp]
            sel_e = np.abs(ve - lam) <= max(pos_tol, 1e-9 * norm_h) * 10
            Ve = Ve_all[:, sel_e]
            W = q_eo @ Vo
            if Ve.shape[1] != Vo.shape[1]:
                pairing_ok = False
                multiplicity_ok = False
                continue
            S = Ve.conj().T @ W
            leak = np.linalg.norm(W - Ve @ S)
            sv = np.linalg.svd(S, compute_uv=False)
            dev = float(np.max(np.abs(sv - math.sqrt(lam)))) if len(sv) else 0.0
            max_sv_dev = max(max_sv_dev, dev, float(leak))
            if dev > pair_tol * max(1.0, math.sqrt(norm_h)) or leak > pair_tol * max(1.0, math.sqrt(norm_h)):
                pairing_ok = False
            key = round(lam, 9)
            d = doublets.setdefault(key, {"energy": lam, "multiplicity": 0, "q_rank_odd": 0, "qd_rank_odd": 0})
            d["multiplicity"] += len(grp)
            # Q and Q* split the pairing between them; their ranks add up to the multiplicity
            d["q_rank_odd"] += int(np.linalg.matrix_rank(q_plain @ Vo, tol=1e-8))
            d["qd_rank_odd"] += int(np.linalg.matrix_rank(qd_plain @ Vo, tol=1e-8))
    qs_anti = _residual(ops.Qs1 @ ops.Qs2 + ops.Qs2 @ ops.Qs1)
    return {
        "dimension": ops.rep.dim,
        "eigenvalues": sorted(float(x) for x in all_vals),
        "min_eigenvalue": float(np.min(all_vals)) if len(all_vals) else 0.0,
        "norm_H": norm_h,
        "kernel_dim_even": ker_even,
        "kernel_dim_odd": ker_odd,
        "witten_index": ker_even - ker_odd,
        "doublets": sorted(doublets.values(), key=lambda d: d["energy"]),
        "doublet_count": int(sum(d["multiplicity"] for d in doublets.values())),
        "multiplicities_match": multiplicity_ok,
        "pairing_bijective": pairing_ok,
        "pairing_max_deviation": max_sv_dev,
        "Qs1Qs2+Qs2Qs1": qs_anti,
        "blocks": len(blocks),
    }


def kernel_basis(ops: SusyOperators, zero_rel: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of ker H, each vector of definite parity."""
    blocks = eigensystem(ops)
    norm_h = hamiltonian_norm(ops)
    tol = zero_rel * norm_h
    cols = []
    for b in blocks:
        for sub, w, v in ((b.even, b.evals_even, b.evecs_even), (b.odd, b.evals_odd, b.evecs_odd)):
            for k in np.flatnonzero(np.abs(w) <= tol):
                full = np.zeros(ops.rep.dim, dtype=complex)
                full[sub] = v[:, k]
                cols.append(full)
    if not cols:
        return np.zeros((ops.rep.dim, 0), dtype=complex)
    return np.column_stack(cols)


def excited_vector(ops: SusyOperators, zero_rel: float = 1e-10) -> np.ndarray | None:
    """Some eigenvector of H with positive eigenvalue, or None."""
    norm_h = hamiltonian_norm(ops)
    for b in eigensystem(ops):
        for sub, w, v in ((b.even, b.evals_even, b.evecs_even), (b.odd, b.evals_odd, b.evecs_odd)):
            ks = np.flatnonzero(w > zero_rel * norm_h)
            if len(ks):
                full = np.zeros(ops.rep.dim, dtype=complex)
                full[sub] = v[:, ks[-1]]
                return full
    return None


# states

@dataclass
class LatticeState:
    """A state probed on the algebra of a finite region.

    'fock' and 'antifock' are the infinite-lattice states with every mode empty
    or filled; 'basis', 'vector' and 'density' live on the Fock space of the
    region itself.
    """

    kind: str
    region: Region
    occupied: frozenset = frozenset()
    vector: np.ndarray | None = None
    density: np.ndarray | None = None

    @classmethod
    def fock(cls, region: Region) -> "LatticeState":
        return cls("fock", region)

    @classmethod
    def antifock(cls, region: Region) -> "LatticeState":
        return cls("antifock", region)

    @classmethod
    def basis(cls, region: Region, occupied) -> "LatticeState":
        from .car import site

        return cls("basis", region, frozenset(site(s) for s in occupied))

    @classmethod
    def from_vector(cls, region: Region, v: np.ndarray) -> "LatticeState":
        v = np.asarray(v, dtype=complex)
        return cls("vector", region, vector=v / np.linalg.norm(v))

    @classmethod
    def from_density(cls, region: Region, rho: np.ndarray) -> "LatticeState":
        rho = np.asarray(rho, dtype=complex)
        tr = np.trace(rho).real
        if tr <= 0:
            raise ValueError("density matrix must have positive trace")
        rho = rho / tr
        if np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) < -1e-10:
            raise ValueError("density matrix is not positive")
        return cls("density", region, density=rho)

    @property
    def occupation_type(self) -> bool:
        return self.kind in ("fock", "antifock", "basis")

    def default_boundary(self) -> str:
        return "infinite" if self.kind in ("fock", "antifock") else "open"

    def occupied_in(self, work: Region) -> frozenset:
        if self.kind == "fock":
            return frozenset()
        if self.kind == "antifock":
            return frozenset(work.sites)
        return self.occupied

    def evaluate(self, p: CarPolynomial):
        """Exact expectation of a polynomial in an occupation-basis state."""
        if not self.occupation_type:
            raise ValueError("exact evaluation needs an occupation-basis state")
        total = GaussRational(0)
        for (c, an), v in p.terms.items():
            if c != an:
                continue
            if self.kind == "fock" and c:
                continue
            if self.kind == "basis" and not set(c) <= self.occupied:
                continue
            k = len(c)
            total = total + (-v if (k * (k - 1) // 2) & 1 else v)
        return total


_VARIANTS = ("delta", "delta_star", "delta_s1", "delta_s2")


def _variant_assignment(psi: ChargeAssignment, variant: str) -> ChargeAssignment:
    if variant == "delta":
        return psi
    if variant == "delta_star":
        return psi.conjugate()
    s1, s2 = psi.symmetrize()
    return s1 if variant == "delta_s1" else s2


def _work_region(state: LatticeState, psi: ChargeAssignment, boundary: str) -> Region:
    return state.region.enlarge(psi.declared_range) if boundary == "infinite" else state.region


def _charge(psi: ChargeAssignment, region: Region, boundary: str) -> CarPolynomial:
    return psi.local_charge(region) if boundary == "infinite" else psi.open_charge(region)


def _all_monomial_masks(idx: SiteIndex, region: Region):
    n = len(region)
    positions = [idx.index[s] for s in region.sorted()]
    small = np.arange(1 << n, dtype=np.int64)
    cm = np.repeat(small, 1 << n)
    am = np.tile(small, 1 << n)
    return embed_masks(cm, positions), embed_masks(am, positions)


def _mask_to_monomial(idx: SiteIndex, cm: int, am: int) -> str:
    from .car import format_monomial

    cs = tuple(idx.sites[k] for k in range(idx.n) if cm >> k & 1)
    an = tuple(idx.sites[k] for k in range(idx.n) if am >> k & 1)
    return format_monomial((cs, an)) or "1"


def _violations_exact(state: LatticeState, charge: CarPolynomial, idx: SiteIndex, CM, AM):
    """Exact integer evaluation of phi([C, m]_gamma) for every basis monomial m."""
    s = idx.mask(state.occupied_in(idx.region))
    if not charge.is_exact():
        raise ValueError("exact evaluation needs exact charge coefficients")
    den = 1
    for c in charge.terms.values():
        den = den * c.den // math.gcd(den, c.den)
    num_re = np.zeros(CM.shape, dtype=object) if den > 1 << 20 else np.zeros(CM.shape, dtype=np.int64)
    num_im = np.zeros_like(num_re)
    eps = 1 - 2 * ((popcount(CM) + popcount(AM)) & 1)
    v1, s1, g1 = apply_masks(idx, CM, AM, s)
    for (pc, pa), coef in charge.terms.items():
        pcm, pam = idx.mask(pc), idx.mask(pa)
        v2, s2, g2 = apply_masks(idx, pcm, pam, s1)
        left = np.where(v1 & v2 & (s2 == s), g1 * g2, 0)
        vp, sp_, gp = apply_masks(idx, pcm, pam, np.int64(s))
        if bool(vp):
            v3, s3, g3 = apply_masks(idx, CM, AM, sp_)
            right = np.where(v3 & (s3 == s), int(gp) * g3, 0)
        else:
            right = 0
        contrib = left - eps * right
        scale = den // coef.den
        num_re = num_re + (coef.re * scale) * contrib
        num_im = num_im + (coef.im * scale) * contrib
    mod2 = num_re * num_re + num_im * num_im
    k = int(np.argmax(mod2)) if mod2.size else 0
    max_exact = math.sqrt(int(mod2.flat[k])) / den if mod2.size else 0.0
    return bool(np.all(mod2 == 0)), max_exact, k


def _violations_matrix(state: LatticeState, charge: CarPolynomial, idx: SiteIndex, CM, AM, rep_vec=None, rho=None):
    """phi([C, m]_gamma) for every basis monomial m via matrices."""
    C = jw.represent(charge, idx)
    eps = 1 - 2 * ((popcount(CM) + popcount(AM)) & 1)
    asign = adjoint_sign(CM, AM)
    vals = np.zeros(CM.shape, dtype=complex)
    if rho is None:
        v = rep_vec
        u = C.conj().T @ v
        w = C @ v
        for s in np.flatnonzero(np.abs(v) > 0):
            valid, new, sg = apply_masks(idx, CM, AM, s)
            vals += np.where(valid, v[s] * sg * np.conj(u[new % idx.dim]), 0)
            # <pi(m)* v, w> with pi(m)* = sign * pi(m') and m' the swapped monomial
            valid2, new2, sg2 = apply_masks(idx, AM, CM, s)
            vals -= eps * np.where(valid2, np.conj(v[s] * sg2 * asign) * w[new2 % idx.dim], 0)
    else:
        Cd = C.toarray()
        X = rho @ Cd
        Y = Cd @ rho
        for s in range(idx.dim):
            if not (np.any(X[s]) or np.any(Y[s])):
                continue
            valid, new, sg = apply_masks(idx, CM, AM, s)
            nn = new % idx.dim
            vals += np.where(valid, sg * (X[s, nn] - eps * Y[s, nn]), 0)
    mods = np.abs(vals)
    k = int(np.argmax(mods)) if mods.size else 0
    return float(mods[k]) if mods.size else 0.0, k


def verify_state_susy(
    state: LatticeState,
    psi: ChargeAssignment,
    method: str = "exact",
    boundary: str | None = None,
    variants=_VARIANTS,
    tol: float = 1e-12,
) -> dict:
    """max |phi(delta(m))| over the monomial basis of the region's algebra.

    method: 'exact' (integer arithmetic on occupation states), 'symbolic'
    (normal-ordered delta(m) followed by the exact state functional) or
    'matrix' (floating-point matrices).
    """
    boundary = boundary or state.default_boundary()
    if boundary not in ("infinite", "open"):
        raise ValueError("boundary must be 'infinite' or 'open'")
    work = _work_region(state, psi, boundary)
    idx = SiteIndex(work)
    CM, AM = _all_monomial_masks(idx, state.region)
    per = {}
    for var in variants:
        ps = _variant_assignment(psi, var)
        charge = _charge(ps, state.region, boundary)
        if method == "exact":
            zero, mx, k = _violations_exact(state, charge, idx, CM, AM)
            per[var] = {"violation": mx, "exact_zero": zero, "worst": _mask_to_monomial(idx, int(CM[k]), int(AM[k]))}
        elif method == "symbolic":
            if not state.occupation_type:
                raise ValueError("symbolic evaluation needs an occupation-basis state")
            mx, worst = 0.0, "1"
            for m in monomial_basis(state.region):
                mp = CarPolynomial({m: GaussRational(1)}, _trusted=True)
                val = state.evaluate(charge * mp - mp.gamma() * charge)
                if abs(val) > mx:
                    mx, worst = abs(val), str(mp)
            per[var] = {"violation": mx, "exact_zero": mx == 0, "worst": worst}
        elif method == "matrix":
            if state.kind in ("vector", "density"):
                if boundary != "open" or work != state.region:
                    raise ValueError("vector and density states live on their own region (open boundary)")
            if state.kind == "density":
                mx, k = _violations_matrix(state, charge, idx, CM, AM, rho=state.density)
            else:
                if state.kind == "vector":
                    v = state.vector
                else:
                    v = np.zeros(idx.dim, dtype=complex)
                    v[idx.mask(state.occupied_in(work))] = 1.0
                mx, k = _violations_matrix(state, charge, idx, CM, AM, rep_vec=v)
            per[var] = {"violation": mx, "exact_zero": None, "worst": _mask_to_monomial(idx, int(CM[k]), int(AM[k]))}
        else:
            raise ValueError(f"unknown method {method!r}")
    report = {
        "state": state.kind,
        "region": [list(s) for s in state.region.sorted()],
        "method": method,
        "boundary": boundary,
        "monomials": int(CM.size),
        "variants": per,
        "violation": max(v["violation"] for v in per.values()),
    }
    if method == "matrix":
        report["supersymmetric"] = report["violation"] <= tol
    else:
        report["supersymmetric"] = all(v["exact_zero"] for v in per.values())
    if all(k in per for k in ("delta", "delta_s1", "delta_s2")):
        z = (lambda v: v["exact_zero"]) if method != "matrix" else (lambda v: v["violation"] <= tol)
        report["equivalence_consistent"] = z(per["delta"]) == (z(per["delta_s1"]) and z(per["delta_s2"]))
    if state.kind in ("vector", "basis") and boundary == "open":
        rep = FockRepresentation(state.region)
        Q = rep.represent(_charge(psi, state.region, "open"))
        v = state.vector if state.kind == "vector" else rep.basis_vector(state.occupied)
        report["norm_Qv"] = float(np.linalg.norm(Q @ v))
        report["norm_Qdv"] = float(np.linalg.norm(Q.conj().T @ v))
    return report


# structural identities

def structural_identities(rep: FockRepresentation, psi: ChargeAssignment, samples: int = 50, seed: int = 0, times=(0.3, 1.7)) -> dict:
    """Matrix checks of pi(delta A) = Q pi(A) - pi(gamma A) Q and companions."""
    rng = np.random.default_rng(seed)
    ops = build_susy_operators(rep, psi, "open")
    Q, Qd = ops.Q, ops.Qd
    star = psi.conjugate()
    r = psi.declared_range
    worst_q = worst_qd = 0.0
    interior = 0
    worst_local = 0.0
    from .supercharge import apply_delta

    for _ in range(samples):
        A = random_polynomial(rep.region, rng, n_terms=3, max_degree=3)
        pa = rep.represent(A)
        pga = rep.represent(A.gamma())
        lhs = rep.represent(apply_delta_region(psi, rep.region, A, "open"))
        worst_q = max(worst_q, _residual(lhs - (Q @ pa - pga @ Q)))
        lhs_d = rep.represent(apply_delta_region(star, rep.region, A, "open"))
        worst_qd = max(worst_qd, _residual(lhs_d - (Qd @ pa - pga @ Qd)))
        if all(x.issubset(rep.region) for x in psi.translates_meeting(A.support()).keys()):
            interior += 1
            diff = apply_delta(psi, A) - apply_delta_region(psi, rep.region, A, "open")
            worst_local = max(worst_local, 0.0 if diff.is_zero() else diff.l1_norm())
    G = ops.gamma
    P_plus, P_minus = rep.projections()
    I = sp.identity(rep.dim, format="csr")
    omega = rep.vacuum()
    susy_vac = float(np.linalg.norm(Q @ omega) + np.linalg.norm(Qd @ omega))
    drift = 0.0
    if susy_vac < 1e-12:
        for _ in range(min(samples, 10)):
            A = random_polynomial(rep.region, rng, n_terms=3, max_degree=4)
            pa = rep.represent(A)
            ref = np.vdot(omega, pa @ omega)
            for t in times:
                psi_t = expm_multiply(-1j * t * ops.H, omega)
                val = np.vdot(psi_t, pa @ psi_t)
                drift = max(drift, float(abs(val - ref)))
    else:
        drift = float("nan")
    return {
        "samples": samples,
        "seed": seed,
        "delta_intertwining": worst_q,
        "delta_star_intertwining": worst_qd,
        "interior_samples": interior,
        "finite_volume_vs_lattice_delta": worst_local,
        "Gamma^2-I": _residual(G @ G - I),
        "Gamma Omega-Omega": float(np.linalg.norm(G @ omega - omega)),
        "Gamma Qs1 Gamma+Qs1": _residual(G @ ops.Qs1 @ G + ops.Qs1),
        "Gamma Qs2 Gamma+Qs2": _residual(G @ ops.Qs2 @ G + ops.Qs2),
        "P+ Qs1 P+": _residual(P_plus @ ops.Qs1 @ P_plus),
        "P- Qs1 P-": _residual(P_minus @ ops.Qs1 @ P_minus),
        "P+ + P- - I": _residual(P_plus + P_minus - I),
        "P+^2-P+": _residual(P_plus @ P_plus - P_plus),
        "P+ P-": _residual(P_plus @ P_minus),
        "vacuum_susy_defect": susy_vac,
        "time_invariance_drift": drift,
    }


# face and affiliation

def density_violation(ops: SusyOperators, psi: ChargeAssignment, rho: np.ndarray, variants=("delta", "delta_star")) -> float:
    """max over basis monomials m of |tr(rho [C, m]_gamma)| with the open charge."""
    state = LatticeState("density", ops.rep.region, density=rho)
    idx = ops.rep.index
    CM, AM = _all_monomial_masks(idx, ops.rep.region)
    worst = 0.0
    for var in variants:
        charge = _charge(_variant_assignment(psi, var), ops.rep.region, "open")
        mx, _ = _violations_matrix(state, charge, idx, CM, AM, rho=rho)
        worst = max(worst, mx)
    return worst


def _random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.clip(w, 0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def face_and_affiliation_checks(psi: ChargeAssignment, region: Region, decompositions: int = 100, seed: int = 0, tol: float = 1e-10) -> dict:
    rng = np.random.default_rng(seed)
    rep = FockRepresentation(region)
    ops = build_susy_operators(rep, psi, "open")
    K = kernel_basis(ops)
    k = K.shape[1]
    results = []
    worst = 0.0
    uniform = K @ K.conj().T / k if k else None
    for trial in range(decompositions):
        if trial == 0 and uniform is not None:
            V, weights = K, np.full(k, 1.0 / k)
        else:
            weights = rng.dirichlet(np.ones(k))
            V = K @ _random_unitary(k, rng)
        rho = (V * weights) @ V.conj().T
        if trial % 2 == 0:
            # operator-interval split: T = rho^1/2 B rho^1/2 with 0 <= B <= I
            root = (V * np.sqrt(weights)) @ V.conj().T
            Ub = _random_unitary(rep.dim, rng)
            B = (Ub * rng.uniform(0.05, 0.95, rep.dim)) @ Ub.conj().T
            T = root @ B @ root
            lam = float(np.trace(T).real)
            parts = [(lam, T / lam), (1 - lam, (rho - T) / (1 - lam))]
        else:
            # spectral split into pure components
            w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
            parts = [(float(w[j]), np.outer(v[:, j], v[:, j].conj())) for j in range(len(w)) if w[j] > 1e-12]
        recon = sum(l * p for l, p in parts)
        assert np.allclose(recon, rho, atol=1e-10)
        comp = max(density_violation(ops, psi, p) for _, p in parts)
        worst = max(worst, comp)
        results.append(comp)
    # contaminated mixture must be flagged
    contaminated = None
    psi_exc = excited_vector(ops)
    if psi_exc is not None and k:
        mix = 0.5 * uniform + 0.5 * np.outer(psi_exc, psi_exc.conj())
        contaminated = density_violation(ops, psi, mix)
    affiliation = affiliation_check(ops, rng)
    return {
        "region": [list(s) for s in region.sorted()],
        "kernel_dim": k,
        "decompositions": decompositions,
        "seed": seed,
        "max_component_violation": worst,
        "face_ok": worst <= tol,
        "contaminated_violation": contaminated,
        "contaminated_flagged": contaminated is not None and contaminated > 1e-6,
        "affiliation": affiliation,
    }


def affiliation_check(ops: SusyOperators, rng: np.random.Generator, random_projections: int = 5, samples: int = 5) -> dict:
    """Q_s on pi_fock (+) pi_antifock versus projections of the commutant I (x) M_2."""
    rep = ops.rep
    n = rep.dim
    I2 = np.eye(2)
    Qs = [sp.kron(I2, ops.Qs1).tocsr(), sp.kron(I2, ops.Qs2).tocsr()]
    projections = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    for _ in range(random_projections):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        projections.append(np.outer(v, v.conj()))
    worst_comm = 0.0
    worst_member = 0.0
    algebra = [sp.kron(I2, rep.represent(random_polynomial(rep.region, rng, 3, 3))).tocsr() for _ in range(samples)]
    for P in projections:
        Pp = sp.kron(sp.csr_matrix(P), sp.identity(n)).tocsr()
        for A in algebra:
            worst_member = max(worst_member, _residual(Pp @ A - A @ Pp))
        for Qm in Qs:
            worst_comm = max(worst_comm, _residual(Qm @ Pp - Pp @ Qm))
    # control: a rank-one projection outside the commutant, onto a state moved by Q_s
    cols = np.flatnonzero(np.asarray(abs(ops.Qs1).sum(axis=0)).ravel())
    control = 0.0
    if len(cols):
        probe = np.zeros(2 * n)
        probe[cols[0]] = 1.0
        Pout = sp.csr_matrix(np.outer(probe, probe))
        control = max(_residual(Qm @ Pout - Pout @ Qm) for Qm in Qs)
    return {
        "projections": len(projections),
        "max_commutator": worst_comm,
        "commutant_membership_defect": worst_member,
        "control_non_commutant": control,
    }
