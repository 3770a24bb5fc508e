import numpy as np
import pytest

from conftest import pauli_matrix
from susylat.car import Region, a, adag
from susylat.fock import (
    FockRepresentation,
    LatticeState,
    build_susy_operators,
    excited_vector,
    face_and_affiliation_checks,
    hamiltonian_norm,
    kernel_basis,
    spectral_report,
    structural_identities,
    susy_algebra_residuals,
    verify_state_susy,
)
from susylat.models import nicolai, nicolai_hermitian, zero

PSI = nicolai()


def ops_on(lo, hi, psi=PSI):
    return build_susy_operators(FockRepresentation(Region.interval(lo, hi)), psi, "open")


@pytest.mark.parametrize("lo,hi", [(-1, 1), (-3, 3), (-2, 3)])
def test_susy_algebra_exact(lo, hi):
    ops = ops_on(lo, hi)
    res = susy_algebra_residuals(ops)
    tol = 1e-10 * hamiltonian_norm(ops)
    assert max(v for v in res.values() if isinstance(v, float)) <= tol


def test_three_site_spectrum_against_brute_force():
    # 8x8 oracle from Pauli strings: the one pattern a(1) a+(0) a(-1) inside {-1, 0, 1}
    sites = [(-1,), (0,), (1,)]
    q = pauli_matrix(a(1) * adag(0) * a(-1), sites)
    h = q @ q.conj().T + q.conj().T @ q
    w = np.linalg.eigvalsh(h)
    kernel = int(np.sum(np.abs(w) < 1e-12))
    parity = np.array([(-1) ** bin(i).count("1") for i in range(8)])
    excited = [i for i in range(8) if h[i, i] > 0.5]
    assert kernel == 6 and sorted(np.round(w[w > 0.5], 12)) == [1.0, 1.0]
    assert sorted(parity[excited]) == [-1, 1]

    rep = spectral_report(ops_on(-1, 1))
    assert rep["kernel_dim_even"] + rep["kernel_dim_odd"] == kernel
    assert rep["doublet_count"] == 1 and rep["doublets"][0]["energy"] == pytest.approx(1.0)
    assert rep["multiplicities_match"] and rep["pairing_bijective"]
    assert np.allclose(rep["eigenvalues"], np.sort(w))


@pytest.mark.parametrize("lo,hi", [(-3, 3), (-4, 4)])
def test_positive_spectrum_and_doublets(lo, hi):
    rep = spectral_report(ops_on(lo, hi))
    assert rep["min_eigenvalue"] >= -1e-10 * rep["norm_H"]
    assert rep["multiplicities_match"] and rep["pairing_bijective"]
    assert rep["doublet_count"] > 0


def test_zero_assignment_spectrum_is_trivial():
    rep = spectral_report(ops_on(0, 3, zero()))
    assert rep["norm_H"] == 0 and rep["kernel_dim_even"] + rep["kernel_dim_odd"] == 16
    assert rep["doublet_count"] == 0


@pytest.mark.parametrize("n", [3, 5])
@pytest.mark.parametrize("kind", ["fock", "antifock"])
def test_fock_states_are_supersymmetric_three_ways(n, kind):
    region = Region.interval(-(n // 2), n // 2)
    st = LatticeState.fock(region) if kind == "fock" else LatticeState.antifock(region)
    assert verify_state_susy(st, PSI, method="exact")["violation"] == 0
    assert verify_state_susy(st, PSI, method="symbolic")["violation"] == 0
    assert verify_state_susy(st, PSI, method="matrix")["violation"] <= 1e-12


def test_non_susy_basis_state_flagged():
    region = Region.interval(-1, 1)
    st = LatticeState.basis(region, [(-1,), (1,)])
    r = verify_state_susy(st, PSI, method="exact")
    assert not r["supersymmetric"] and r["violation"] > 0
    assert verify_state_susy(st, PSI, method="matrix")["violation"] == pytest.approx(r["violation"])


def test_kernel_vectors_are_susy_and_excited_ones_are_not():
    ops = ops_on(-1, 1)
    region = ops.rep.region
    K = kernel_basis(ops)
    assert K.shape[1] == 6
    for v in K.T:
        st = LatticeState.from_vector(region, v)
        r = verify_state_susy(st, PSI, method="matrix", boundary="open")
        assert r["violation"] <= 1e-12
        assert np.linalg.norm(ops.H @ v) <= 1e-12
    v = excited_vector(ops)
    r = verify_state_susy(LatticeState.from_vector(region, v), PSI, method="matrix", boundary="open")
    assert r["violation"] > 1e-3


def test_structural_identities():
    rep = FockRepresentation(Region.interval(-2, 2))
    r = structural_identities(rep, PSI, samples=10)
    for key in ("delta_intertwining", "delta_star_intertwining", "Gamma^2-I", "Gamma Qs1 Gamma+Qs1", "P+ P-"):
        assert r[key] <= 1e-10


def test_face_and_affiliation_small():
    r = face_and_affiliation_checks(PSI, Region.interval(-1, 1), decompositions=10, seed=3)
    assert r["face_ok"] and r["contaminated_flagged"]
    aff = r["affiliation"]
    assert aff["max_commutator"] <= 1e-10 and aff["commutant_membership_defect"] <= 1e-10


def test_non_nilpotent_model_breaks_the_algebra():
    res = susy_algebra_residuals(ops_on(-3, 3, nicolai_hermitian()))
    assert res["Q^2"] > 1e-6
