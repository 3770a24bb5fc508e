"""Residual reports for the truncated free supersymmetric field."""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg as sla

from . import algebra as alg
from .functions import TestFunction, compute_pairings, covariance_psd, covariance_under_translation, wick_residual
from .space import TruncatedQftSpace, build_space, restricted_norm, shell_spectrum


def default_functions(grid: int = 4096, amplitude: float = 0.5) -> dict:
    return {
        "f": TestFunction.preset("gaussian", grid=grid, amplitude=amplitude),
        "g": TestFunction.preset("translated-gaussian", grid=grid, amplitude=amplitude),
        "h": TestFunction.preset("hermite-1", grid=grid, amplitude=amplitude),
    }


def _herm_defect(X: np.ndarray) -> float:
    return float(np.linalg.norm(X - X.conj().T, 2))


def check_space(space: TruncatedQftSpace, f: TestFunction, g: TestFunction, m0: int = 1) -> dict:
    """Clifford, CCR, supercharge and two-point identities of the realization."""
    low = space.low_occupation(m0)
    I = np.eye(space.dim)
    cf, cg, jf, jg = space.c(f), space.c(g), space.j(f), space.j(g)
    Q = space.Q
    G = space.gamma
    df = f.derivative()
    clifford = np.linalg.norm(cf @ cg + cg @ cf - space.inner(f, g) * I, 2)
    ccr = restricted_norm(jf @ jg - jg @ jf - 1j * space.sigma(f, g) * I, low)
    q_c = np.linalg.norm(Q @ cf + cf @ Q - jf, 2)
    q_j = restricted_norm(Q @ jf - jf @ Q - 1j * space.c(df), low)
    two_fer = abs(space.expect(cf @ cg) - space.fer(f, g))
    two_bos = abs(space.expect(jf @ jg) - space.bos(f, g))
    quad = compute_pairings(f, g, space.kappa)
    return {
        "clifford": float(clifford),
        "clifford_vs_inner_product": abs(space.inner(f, g) - f.inner(g)),
        "c_hermitian": _herm_defect(cf),
        "j_hermitian": _herm_defect(jf),
        "ccr_low": float(ccr),
        "ccr_constant": space.sigma(f, g),
        "sigma_x_space": f.sigma(g),
        "Q_hermitian": _herm_defect(Q),
        "Q_odd": float(np.linalg.norm(G @ Q @ G + Q, 2)),
        "Q_omega": float(np.linalg.norm(Q @ space.omega)),
        "Qc_minus_j": float(q_c),
        "Qj_minus_icdf_low": float(q_j),
        "two_point_fer": two_fer,
        "two_point_bos": two_bos,
        "projection_error_fer": abs(space.fer(f, g) - quad.fer),
        "projection_error_bos": abs(space.bos(f, g) - quad.bos),
        "resolvent_norm": float(np.linalg.norm(space.R(1.0, f), 2)),
    }


def check_resolvent_relations(space: TruncatedQftSpace, samples: list[tuple], m0: int = 1) -> dict:
    """Residuals of the five resolvent relations for samples (lam, mu, f, g).

    Adjoint, scaling and the resolvent identity are exact matrix identities; the
    commutator and product relations use the realized symplectic constant and
    hold up to the cutoff, measured on occupations <= m0.
    """
    low = space.low_occupation(m0)
    worst = {"adjoint": 0.0, "scaling": 0.0, "resolvent_identity": 0.0, "commutator": 0.0, "product": 0.0}
    for lam, mu, f, g in samples:
        Rl = space.R(lam, f)
        Rm_f = space.R(mu, f)
        Rmg = space.R(mu, g)
        s = space.sigma(f, g)
        vals = {
            "adjoint": np.linalg.norm(Rl.conj().T - space.R(-lam, f), 2),
            "scaling": np.linalg.norm(Rl - space.R(1.0, f.scale(1.0 / lam)) / lam, 2),
            "resolvent_identity": np.linalg.norm(Rl - Rm_f - 1j * (mu - lam) * Rl @ Rm_f, 2),
            "commutator": restricted_norm(Rl @ Rmg - Rmg @ Rl - 1j * s * Rl @ Rmg @ Rmg @ Rl, low),
        }
        if lam + mu != 0:
            rhs = space.R(lam + mu, f + g) @ (Rl + Rmg + 1j * s * Rl @ Rl @ Rmg)
            vals["product"] = restricted_norm(Rl @ Rmg - rhs, low)
        for k, v in vals.items():
            worst[k] = max(worst[k], float(v))
    return worst


def resolvent_sweep(f: TestFunction, g: TestFunction, cutoffs=(2, 4, 8), modes: int = 1, dp: float = 1.0, m0: int = 1, samples=None) -> dict:
    samples = samples or [(1.0, 2.0, f, g), (1.3, -0.7, f, g), (-2.0, 0.5, g, f)]
    rows = []
    for M in cutoffs:
        sp = build_space(modes, M, dp)
        rows.append({"cutoff": M, **check_resolvent_relations(sp, samples, m0)})
    mono = {}
    for key in ("commutator", "product"):
        seq = [r[key] for r in rows]
        mono[key] = all(b < a for a, b in zip(seq, seq[1:]))
    return {"rows": rows, "monotone": mono}


def superderivation_case2(space: TruncatedQftSpace, word: tuple, m0: int = 1) -> dict:
    """Formula value of delta_s on a word against [Q_s, .]_gamma, on occupations <= m0."""
    low = space.low_occupation(m0)
    comm = alg.commutator_value(space, word)
    formula = alg.evaluate(space, alg.delta_word(word))
    literal = alg.evaluate(space, alg.delta_word(word, literal=True))
    return {
        "word": " ".join(map(repr, word)),
        "residual": restricted_norm(formula - comm, low),
        "residual_literal": restricted_norm(literal - comm, low),
        "norm": restricted_norm(comm, low),
    }


def symmetry_check(space: TruncatedQftSpace, f: TestFunction) -> dict:
    """delta_s(X*) = -(-1)^{|X|} delta_s(X)* on the generators, via the commutator with hermitian Q_s."""
    out = {}
    for name, X, odd in (("R", space.R(1.0, f), False), ("zeta", space.zeta(f), True)):
        dX = space.graded_commutator_Q(X, odd)
        dXs = space.graded_commutator_Q(X.conj().T, odd)
        sign = 1.0 if odd else -1.0
        out[name] = float(np.linalg.norm(dXs - sign * dX.conj().T, 2))
    return out


def mollifier_convergence(space: TruncatedQftSpace, f: TestFunction, lams=(1.0, 10.0, 100.0), m0: int = 1) -> dict:
    """|(i lam R(lam, f) - I) Omega| and |delta_s(i lam R(lam, f))| along a lambda ladder."""
    low = space.low_occupation(m0)
    df = f.derivative()
    c_norm_exact = math.sqrt(df.inner(df) / 2)
    c_norm_space = float(np.linalg.norm(space.c(df), 2))
    rows = []
    for lam in lams:
        N = 1j * lam * space.R(lam, f)
        to_id = float(np.linalg.norm((N - np.eye(space.dim)) @ space.omega))
        dN = space.graded_commutator_Q(N, False)
        formula = alg.evaluate(space, alg.delta_expr(alg.mollifier_c(f, lam)))
        closed = -(1.0 / lam) * space.c(df) @ np.linalg.matrix_power(space.R(1.0, f.scale(1.0 / lam)), 2)
        measured = restricted_norm(dN, low)
        slack = restricted_norm(dN - formula, low)
        rows.append({
            "lam": lam,
            "to_identity": to_id,
            "delta_norm": measured,
            "bound": c_norm_exact / lam,
            "truncation_slack": slack,
            "closed_form_residual": float(np.linalg.norm(formula - closed, 2)),
            "within_bound": measured <= c_norm_exact / lam + slack + 1e-12,
        })
    dec = lambda key: all(b[key] < a[key] for a, b in zip(rows, rows[1:]))
    return {
        "c_df_norm": c_norm_space,
        "c_df_norm_formula": c_norm_exact,
        "rows": rows,
        "to_identity_decreasing": dec("to_identity"),
        "delta_decreasing": dec("delta_norm"),
        "bounded": all(r["within_bound"] for r in rows),
    }


def mollified_core_check(space: TruncatedQftSpace, fs, rs, lam: float) -> float:
    """|N_{B,lam} B - (i lam)^n zeta(f/lam).. R..|: the mollified monomial lies in the core."""
    direct, core = alg.mollified_monomial(fs, rs, lam)
    return float(np.linalg.norm(alg.evaluate(space, direct) - alg.evaluate(space, core), 2))


def default_mollified_words(fns: dict, lam: float = 2.0) -> list[tuple]:
    f, g, h = fns["f"], fns["g"], fns["h"]
    out = []
    for fs, rs in (([f], []), ([f], [(1.0, g)]), ([f, g], []), ([f, g], [(-1.5, h)]), ([h], [(2.0, f)]), ([], [(1.0, f), (0.5, g)])):
        _, core = alg.mollified_monomial(fs, rs, lam)
        out.append(core[0][1])
    return out


def susy_state_wick_check(f: TestFunction, g: TestFunction, space: TruncatedQftSpace | None = None, words=None, kappa: float = 1.0) -> dict:
    """Quadrature residual |fer(f, g') + i bos(f, g)| and |phi(delta_s(W))| on core words."""
    out = {"wick": wick_residual(f, g, kappa)}
    if space is not None:
        rows = []
        for w in words or []:
            v = space.expect(alg.evaluate(space, alg.delta_word(w)))
            lv = space.expect(alg.evaluate(space, alg.delta_word(w, literal=True)))
            rows.append({"word": " ".join(map(repr, w)), "phi_delta": abs(v), "phi_delta_literal": abs(lv)})
        out["state"] = rows
        out["max_phi_delta"] = max((r["phi_delta"] for r in rows), default=0.0)
    return out


def bogoljubov_covariance(space: TruncatedQftSpace, f: TestFunction, g: TestFunction, t: float) -> dict:
    """Translation f -> f_t against U(t) = exp(i t Q_s^2) in the truncated space."""
    ft, gt = f.translate(t), g.translate(t)
    U = sla.expm(1j * t * space.H)
    cov_c = np.linalg.norm(U @ space.c(f) @ U.conj().T - space.c(ft), 2)
    low = space.low_occupation(1)
    cov_R = restricted_norm(U @ space.R(1.0, f) @ U.conj().T - space.R(1.0, ft), low)
    words = [(alg.zeta(f), alg.zeta(g)), (alg.R(1.0, f), alg.R(2.0, g))]
    words_t = [(alg.zeta(ft), alg.zeta(gt)), (alg.R(1.0, ft), alg.R(2.0, gt))]
    inv = max(abs(space.expect(alg.evaluate_word(space, a)) - space.expect(alg.evaluate_word(space, b))) for a, b in zip(words, words_t))
    return {
        **covariance_under_translation(f, g, t, space.kappa),
        "U_c_covariance": float(cov_c),
        "U_R_covariance_low": float(cov_R),
        "vacuum_expectation_change": float(inv),
        "H_omega": float(np.linalg.norm(space.H @ space.omega)),
    }


def run_case2(modes: int = 2, cutoff: int = 4, grid: int = 4096, dp: float = 1.0, amplitude: float = 0.5, kappa: float = 1.0) -> dict:
    """Full Case II report at one truncation, plus the cutoff sweeps."""
    fns = default_functions(grid, amplitude)
    f, g, h = fns["f"], fns["g"], fns["h"]
    space = build_space(modes, cutoff, dp, kappa)
    gen_words = [(alg.zeta(f),), (alg.R(1.0, f),), (alg.zeta(g), alg.R(2.0, h))]
    pair = compute_pairings(f, g, kappa)
    shell = shell_spectrum(space)
    return {
        "modes": modes,
        "cutoff": cutoff,
        "grid": grid,
        "dp": dp,
        "kappa": kappa,
        "dimension": space.dim,
        "pairings": pair.to_dict(),
        "pairings_ff": compute_pairings(f, f, kappa).to_dict(),
        "covariance": [covariance_psd([f, g], "bos", kappa), covariance_psd([f, g], "fer", kappa)],
        "space": check_space(space, f, g),
        "shell_spectrum": shell.to_dict(),
        "resolvent": check_resolvent_relations(space, [(1.0, 2.0, f, g), (1.3, -0.7, f, g)]),
        "resolvent_sweep": resolvent_sweep(f, g),
        "superderivation": [superderivation_case2(space, w) for w in gen_words],
        "symmetry": symmetry_check(space, f),
        "mollifier": mollifier_convergence(space, f),
        "mollified_core": mollified_core_check(space, [f, g], [(1.0, h)], 2.0),
        "wick": susy_state_wick_check(f, g, space, default_mollified_words(fns), kappa),
        "bogoljubov": bogoljubov_covariance(space, f, g, 0.4),
    }
