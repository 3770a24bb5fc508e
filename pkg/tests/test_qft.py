import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import dawsn

from susylat.qft import DecayError, DimensionError, TestFunction, build_space, compute_pairings, shell_spectrum, wick_residual
from susylat.qft import algebra as alg
from susylat.qft.checks import (
    bogoljubov_covariance,
    check_resolvent_relations,
    check_space,
    default_functions,
    default_mollified_words,
    mollified_core_check,
    mollifier_convergence,
    resolvent_sweep,
    superderivation_case2,
    susy_state_wick_check,
)
from susylat.qft.functions import bos, covariance_psd, covariance_under_translation, fer

F = TestFunction.preset("gaussian")
G = TestFunction.preset("translated-gaussian")
H = TestFunction.preset("hermite-1")

# closed forms for f = exp(-x^2), g = f(. - 1), with the unitary transform fhat(p) = exp(-p^2/4)/sqrt(2)
R2 = math.sqrt(2.0)
E = math.exp(-0.5)
FER_FF = 0.5 * math.sqrt(math.pi / 2)
BOS_FF = 0.5
FER_FG = 0.5 * (math.sqrt(math.pi / 2) * E + 1j * R2 * dawsn(1 / R2))
BOS_FG = 0.5 * ((1 - R2 * dawsn(1 / R2)) + 1j * math.sqrt(math.pi / 2) * E)
SIGMA_FG = math.sqrt(math.pi / 2) * E


def test_pairings_against_closed_forms():
    assert fer(F, F) == pytest.approx(FER_FF, abs=1e-12)
    assert bos(F, F) == pytest.approx(BOS_FF, abs=1e-12)
    assert fer(F, G) == pytest.approx(FER_FG, abs=1e-12)
    assert bos(F, G) == pytest.approx(BOS_FG, abs=1e-12)
    assert F.sigma(G) == pytest.approx(SIGMA_FG, abs=1e-12)


def test_symplectic_form_in_both_normalizations():
    p1 = compute_pairings(F, G, kappa=1.0)
    assert p1.symplectic_residual <= 1e-10
    assert (p1.bos - p1.bos_swapped) == pytest.approx(1j * SIGMA_FG, abs=1e-10)
    p2 = compute_pairings(F, G, kappa=R2)
    assert (p2.bos - p2.bos_swapped) == pytest.approx(1j * R2 * SIGMA_FG, abs=1e-10)
    assert p2.symplectic_residual <= 1e-10


@pytest.mark.parametrize("f,g", [(F, G), (F, H), (G, H), (H, H), (F, F)])
def test_wick_identity(f, g):
    assert wick_residual(f, g)["residual"] <= 1e-8


@settings(max_examples=6)
@given(st.floats(0.5, 2.0), st.floats(-3, 3), st.floats(0.6, 1.5))
def test_wick_identity_for_random_gaussians(amp, center, width):
    f = TestFunction.preset("gaussian", amplitude=amp, center=center, width=width)
    assert wick_residual(f, G)["residual"] <= 1e-8


@settings(max_examples=4)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_two_point_matrices_are_psd(coefs):
    h = H.scale(coefs[0]) + F.scale(coefs[1]) + G.scale(coefs[2])
    for kind in ("bos", "fer"):
        assert covariance_psd([F, G, h], kind)["psd"]


def test_translation_leaves_pairings_invariant():
    r = covariance_under_translation(F, G, 0.7)
    assert max(r["fer_change"], r["bos_change"], r["sigma_change"]) <= 1e-10


def test_spectral_derivative_and_translation():
    x = F.x
    assert np.allclose(F.derivative().samples, -2 * x * np.exp(-(x**2)), atol=1e-10)
    assert np.allclose(F.translate(1.0).samples, G.samples, atol=1e-10)


def test_decay_is_enforced():
    with pytest.raises(DecayError):
        TestFunction.preset("gaussian", width=8.0)
    with pytest.raises(ValueError):
        TestFunction.preset("lorentzian")


def test_dimension_limit():
    with pytest.raises(DimensionError):
        build_space(6, 8)


FNS = default_functions()
SPACE = build_space(2, 4)


def test_space_identities():
    r = check_space(SPACE, FNS["f"], FNS["g"])
    for key in ("clifford", "c_hermitian", "j_hermitian", "Q_hermitian", "Q_odd", "Q_omega", "Qc_minus_j", "Qj_minus_icdf_low"):
        assert r[key] <= 1e-12, key
    assert r["ccr_low"] <= 1e-12
    assert r["two_point_fer"] <= 1e-12 and r["two_point_bos"] <= 1e-12


def test_shell_spectrum_vacuum_and_doublets():
    s = shell_spectrum(SPACE)
    assert (s.kernel_even, s.kernel_odd) == (1, 0)
    assert s.doublets_paired and s.min_eigenvalue >= -1e-12
    # Q_s^2 = sum_k p_k (n_b + n_d) with p_k = 1, 2 below the shell
    assert all(abs(lv["energy"] - round(lv["energy"])) < 1e-9 for lv in s.levels)


def test_exact_resolvent_identities():
    r = check_resolvent_relations(SPACE, [(1.0, 2.0, FNS["f"], FNS["g"]), (-0.4, 3.0, FNS["h"], FNS["f"])])
    assert max(r["adjoint"], r["scaling"], r["resolvent_identity"]) <= 1e-12


def test_resolvent_relations_improve_with_cutoff():
    r = resolvent_sweep(FNS["f"], FNS["g"])
    assert r["monotone"]["commutator"] and r["monotone"]["product"]


@pytest.mark.parametrize("M", [2, 4])
def test_superderivation_on_generators_is_exact(M):
    sp = build_space(2, M)
    for w in [(alg.c(FNS["f"]),), (alg.j(FNS["f"]),), (alg.c(FNS["h"]), alg.j(FNS["g"]))]:
        assert superderivation_case2(sp, w)["residual"] <= 1e-12


def test_superderivation_on_resolvent_words_converges():
    w = (alg.zeta(FNS["f"]),)
    res = [superderivation_case2(build_space(1, M), w) for M in (2, 4, 8)]
    corr = [r["residual"] for r in res]
    lit = [r["residual_literal"] for r in res]
    assert corr[0] > corr[1] > corr[2]
    assert lit[-1] > 10 * corr[-1]


def test_graded_leibniz_on_words():
    f, g = FNS["f"], FNS["g"]
    w = (alg.c(f), alg.zeta(g), alg.R(2.0, f))
    expr = alg.delta_word(w)
    assert len(expr) == 1 + 3 + 1
    assert alg.word_parity(w) == 0


def test_mollifiers():
    r = mollifier_convergence(SPACE, FNS["f"])
    assert r["to_identity_decreasing"] and r["delta_decreasing"] and r["bounded"]
    assert all(row["closed_form_residual"] <= 1e-12 for row in r["rows"])
    assert mollified_core_check(SPACE, [FNS["f"], FNS["g"]], [(1.0, FNS["h"])], 2.0) <= 1e-12


def test_susy_state_on_mollified_words():
    words = default_mollified_words(FNS)
    r2 = susy_state_wick_check(FNS["f"], FNS["g"], build_space(2, 2), words)
    r4 = susy_state_wick_check(FNS["f"], FNS["g"], SPACE, words)
    assert r4["max_phi_delta"] <= 1e-4
    assert r4["max_phi_delta"] < r2["max_phi_delta"]


def test_translation_covariance_in_the_space():
    r = bogoljubov_covariance(build_space(2, 2), FNS["f"], FNS["g"], 0.4)
    assert r["H_omega"] <= 1e-12
