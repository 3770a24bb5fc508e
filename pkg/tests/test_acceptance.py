"""End-to-end acceptance checks for the Nicolai chain and the continuum model.

Each test prints one PASS/FAIL line; run with -s or read the captured report.
"""

import math
import time

import numpy as np
import pytest

from conftest import pauli_matrix
from susylat.car import Region, a, adag
from susylat.dynamics import commutation_residual, conjugation_oracle, delta0_norm_check, stabilization
from susylat.fock import (
    FockRepresentation,
    LatticeState,
    build_susy_operators,
    face_and_affiliation_checks,
    hamiltonian_norm,
    kernel_basis,
    spectral_report,
    susy_algebra_residuals,
    verify_state_susy,
)
from susylat.models import nicolai
from susylat.qft import TestFunction, build_space, wick_residual
from susylat.qft.checks import (
    check_resolvent_relations,
    default_functions,
    default_mollified_words,
    mollifier_convergence,
    resolvent_sweep,
    susy_state_wick_check,
)
from susylat.supercharge import check_nilpotent, norm_constants

PSI = nicolai()
S1, _ = PSI.symmetrize()
K = norm_constants(S1)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def chain(n):
    lo = -(n // 2)
    return Region.interval(lo, lo + n - 1)


def ops_on(n):
    return build_susy_operators(FockRepresentation(chain(n)), PSI, "open")


def test_criterion_1_nilpotency(report):
    t = time.perf_counter()
    r = check_nilpotent(PSI, periods=2)
    dt = time.perf_counter() - t
    ok = r.nilpotent and r.exact and dt < 1.0
    assert report(1, ok, f"nilpotent={r.nilpotent} exact={r.exact} generators={r.checked} {dt:.2f}s")


def test_criterion_2_susy_states(report):
    t = time.perf_counter()
    worst_exact = worst_sym = worst_mat = 0.0
    for n in (5, 7, 9):
        for st in (LatticeState.fock(chain(n)), LatticeState.antifock(chain(n))):
            worst_exact = max(worst_exact, verify_state_susy(st, PSI, method="exact")["violation"])
            worst_mat = max(worst_mat, verify_state_susy(st, PSI, method="matrix")["violation"])
            if n == 5:
                worst_sym = max(worst_sym, verify_state_susy(st, PSI, method="symbolic")["violation"])
    dt = time.perf_counter() - t
    ok = worst_exact == 0 and worst_sym == 0 and worst_mat <= 1e-12 and dt < 10
    detail = f"exact(5,7,9)={worst_exact} symbolic(5)={worst_sym} matrix(5,7,9)={worst_mat:.1e} {dt:.1f}s"
    assert report(2, ok, detail)


def test_criterion_3_susy_algebra(report):
    t = time.perf_counter()
    worst = 0.0
    for n in (3, 5, 7, 9, 11, 13):
        ops = ops_on(n)
        res = susy_algebra_residuals(ops)
        rel = max(v for v in res.values() if isinstance(v, float)) / hamiltonian_norm(ops)
        worst = max(worst, rel)
    dt = time.perf_counter() - t
    ok = worst <= 1e-10 and dt < 120
    assert report(3, ok, f"max residual/|H| over 3..13 sites = {worst:.1e} {dt:.1f}s")


def test_criterion_4_ground_state_and_positivity(report):
    ok = True
    worst_min = 0.0
    for n in (3, 5, 7, 9, 11):
        ops = ops_on(n)
        rep = spectral_report(ops)
        worst_min = min(worst_min, rep["min_eigenvalue"] / rep["norm_H"])
        ok &= rep["min_eigenvalue"] >= -1e-10 * rep["norm_H"]
        # SUSY vectors: Fock, anti-Fock and everything annihilated by Q and Q*
        vecs = [ops.rep.vacuum(), ops.rep.basis_vector(ops.rep.region.sorted())]
        if n <= 7:
            vecs += list(kernel_basis(ops).T)
        for v in vecs:
            susy = np.linalg.norm(ops.Q @ v) + np.linalg.norm(ops.Qd @ v) <= 1e-12
            ok &= susy and np.linalg.norm(ops.H @ v) <= 1e-12
    assert report(4, ok, f"min eigenvalue/|H| = {worst_min:.1e} on 3..11 sites; SUSY vectors in ker H")


def test_criterion_5_doublets(report):
    sites = [(-1,), (0,), (1,)]
    q = pauli_matrix(a(1) * adag(0) * a(-1), sites)
    h = q @ q.conj().T + q.conj().T @ q
    w = np.linalg.eigvalsh(h)
    kernel = int(np.sum(np.abs(w) < 1e-12))
    rep3 = spectral_report(ops_on(3))
    ok = kernel == 6 and rep3["kernel_dim_even"] + rep3["kernel_dim_odd"] == 6 and rep3["doublet_count"] == 1
    ok &= np.allclose(rep3["eigenvalues"], np.sort(w))
    for n in (3, 5, 7, 9, 11):
        rep = spectral_report(ops_on(n))
        ok &= rep["multiplicities_match"] and rep["pairing_bijective"]
    assert report(5, ok, f"3 sites: kernel {kernel} (brute force 8x8), doublets {rep3['doublet_count']}; pairing on 3..11 sites")


def test_criterion_6_face(report):
    r = face_and_affiliation_checks(PSI, Region.interval(-2, 2), decompositions=100, seed=0)
    ok = r["face_ok"] and r["max_component_violation"] <= 1e-10 and r["contaminated_flagged"]
    detail = f"100 decompositions, worst component {r['max_component_violation']:.1e}, contaminated {r['contaminated_violation']:.2f}"
    assert report(6, ok, detail)


def test_criterion_7_norm_bound(report):
    r = delta0_norm_check(S1, samples=20, n_max=5, seed=0)
    ok = r["holds"] and len(r["rows"]) == 100
    assert report(7, ok, f"20 samples, n<=5, min slack {r['min_log10_slack']:.1f} decades")


def test_criterion_8_dynamics(report):
    t0 = time.perf_counter()
    half = K.t0 / 2
    lam = Region.interval(-3, 3)
    ok = True
    firsts = {}
    for N in (2, 3):
        rows = stabilization(S1, a(0), list(range(0, 4 * N + 1)), half, N)
        first = next(r["k"] for i, r in enumerate(rows) if all(s["equal_to_largest"] for s in rows[i:]))
        firsts[N] = first
        ok &= first <= 2 * N * K.r
    oracles = [conjugation_oracle(S1, lam, a(0) + adag(1) * a(-1), half), conjugation_oracle(S1, lam, a(0), 1e-3)]
    ok &= all(o["within_tail_bound"] and o["work_sites"] == 11 for o in oracles)
    ladder = commutation_residual(PSI, [Region.interval(-k, k) for k in range(0, 8)], a(0), half, 2)
    seq = [r["residual"] for r in ladder]
    ok &= all(b <= a_ for a_, b in zip(seq, seq[1:])) and ladder[-1]["exact_zero"]
    dt = time.perf_counter() - t0
    ok &= dt < 60
    detail = (
        f"stable from k={firsts} (2Nr={ {N: 2 * N * K.r for N in firsts} }); "
        f"oracle diff {oracles[0]['oracle_difference']:.1e} vs tail {oracles[0]['tail_bound']:.1e} + 1e-12 roundoff (t0/2), "
        f"{oracles[1]['oracle_difference']:.1e} vs tail {oracles[1]['tail_bound']:.1e} (t=1e-3, N={oracles[1]['N']}); "
        f"ladder zero at |L|={ladder[-1]['size']} {dt:.1f}s"
    )
    assert report(8, ok, detail)


def test_criterion_9_resolvent(report):
    fns = default_functions()
    f, g = fns["f"], fns["g"]
    r = check_resolvent_relations(build_space(2, 4), [(1.0, 2.0, f, g), (1.3, -0.7, f, g), (-2.0, 0.5, g, f)])
    exact = max(r["adjoint"], r["scaling"], r["resolvent_identity"])
    sweep = resolvent_sweep(f, g, cutoffs=(2, 4, 8), modes=1)
    ok = exact <= 1e-12 and all(sweep["monotone"].values())
    comm = [f"{row['commutator']:.1e}" for row in sweep["rows"]]
    assert report(9, ok, f"exact identities {exact:.1e}; commutator residual along M=2,4,8: {comm}")


def test_criterion_10_wick(report):
    presets = [
        TestFunction.preset("gaussian", grid=4096),
        TestFunction.preset("translated-gaussian", grid=4096),
        TestFunction.preset("gaussian", grid=4096, amplitude=0.5, center=-1.0, width=0.8),
    ]
    wick = max(wick_residual(f, g)["residual"] for f in presets for g in presets)
    fns = default_functions()
    words = default_mollified_words(fns)
    phi = {M: susy_state_wick_check(fns["f"], fns["g"], build_space(2, M), words)["max_phi_delta"] for M in (2, 4)}
    ok = wick <= 1e-8 and phi[4] <= 1e-4
    assert report(10, ok, f"Wick residual {wick:.1e}; phi(delta_s W) at N=2: M=2 {phi[2]:.1e}, M=4 {phi[4]:.1e}")


def test_criterion_11_mollifiers(report):
    fns = default_functions()
    r = mollifier_convergence(build_space(2, 4), fns["f"])
    ok = r["to_identity_decreasing"] and r["delta_decreasing"] and r["bounded"]
    rows = ", ".join(f"lam={row['lam']:g}: {row['to_identity']:.1e}/{row['delta_norm']:.1e}" for row in r["rows"])
    assert report(11, ok, f"|(i lam R - I)Omega| / |delta_s N|: {rows}")


def test_constants_used_above():
    # L = 6 and log M = 144 for the symmetrized Nicolai charge
    assert K.L == 6 and math.isclose(K.log_M, 144)
