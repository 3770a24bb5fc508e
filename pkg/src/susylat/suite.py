"""Verification suite over a model file, producing a schema-versioned report."""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .car import Region, a
from .dynamics import commutation_residual, conjugation_oracle
from .fock import (
    FockRepresentation,
    LatticeState,
    build_susy_operators,
    face_and_affiliation_checks,
    hamiltonian_norm,
    spectral_report,
    susy_algebra_residuals,
    verify_state_susy,
)
from .modelfile import CASE_I, ModelFile, serialize_model
from .sampling import random_polynomial
from .supercharge import apply_delta, apply_delta_star, check_nilpotent, norm_constants

SCHEMA = "susylat.report/1"
TIMING_KEYS = ("seconds",)

DEFAULTS = {
    "region": Region.interval(-3, 3),
    "state-sizes": [5, 7, 9],
    "face-region": Region.interval(-2, 2),
    "time": 1e-3,
    "tol": 1e-8,
    "seed": 0,
    "samples": 20,
    "decompositions": 100,
    "modes": 2,
    "cutoff": 4,
    "grid": 4096,
    "dp": 1.0,
    "amplitude": 0.5,
    "kappa": 1.0,
    "periods": 2,
}


def _param(model: ModelFile, key: str):
    return model.params.get(key, DEFAULTS[key])


def _rng(model: ModelFile, check: str) -> np.random.Generator:
    seed = int(_param(model, "seed"))
    tag = int.from_bytes(hashlib.sha256(check.encode()).digest()[:4], "little")
    return np.random.default_rng([seed, tag])


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def check_nilpotent_item(model, psi):
    rep = check_nilpotent(psi, periods=int(_param(model, "periods")))
    return _status(rep.nilpotent), rep.to_dict()


def check_leibniz(model, psi):
    """delta(FG) = delta(F) G + gamma(F) delta(G), and the same for delta*, on random pairs."""
    rng = _rng(model, "leibniz")
    n = int(_param(model, "samples"))
    region = Region.interval(0, 2) if psi.dimension == 1 else Region.cube(1, psi.dimension)
    failures = 0
    for _ in range(n):
        F = random_polynomial(region, rng, 3, 3)
        G = random_polynomial(region.translate((1,) * psi.dimension), rng, 3, 3)
        for d in (apply_delta, apply_delta_star):
            lhs = d(psi, F * G)
            rhs = d(psi, F) * G + F.gamma() * d(psi, G)
            failures += lhs != rhs
    return _status(failures == 0), {"samples": n, "failures": int(failures)}


def _chain(model) -> Region:
    return _param(model, "region")


def check_susy_algebra(model, psi):
    rep = FockRepresentation(_chain(model))
    ops = build_susy_operators(rep, psi, "open")
    res = susy_algebra_residuals(ops)
    h = hamiltonian_norm(ops)
    tol = 1e-10 * max(h, 1.0)
    worst = max(v for k, v in res.items() if isinstance(v, float))
    return _status(worst <= tol), {"norm_H": h, "tolerance": tol, "residuals": res}


def check_spectrum(model, psi):
    rep = FockRepresentation(_chain(model))
    ops = build_susy_operators(rep, psi, "open")
    rep_ = spectral_report(ops)
    ok = rep_["min_eigenvalue"] >= -1e-10 * max(rep_["norm_H"], 1.0) and rep_["multiplicities_match"] and rep_["pairing_bijective"]
    rep_ = dict(rep_)
    rep_.pop("eigenvalues", None)
    return _status(ok), rep_


def check_states(model, psi):
    """Exact integer evaluation and the matrix route on every size; the
    normal-ordered polynomial route as well on the smallest size."""
    rows = []
    ok = True
    sizes = list(_param(model, "state-sizes"))
    for n in sizes:
        lo = -(n // 2)
        region = Region.interval(lo, lo + n - 1)
        for kind in ("fock", "antifock"):
            st = LatticeState.fock(region) if kind == "fock" else LatticeState.antifock(region)
            ex = verify_state_susy(st, psi, method="exact")
            mat = verify_state_susy(st, psi, method="matrix")
            row = {"sites": n, "state": kind, "exact": ex["violation"], "matrix": mat["violation"]}
            good = ex["violation"] == 0 and mat["violation"] <= 1e-12
            if n == min(sizes):
                sym = verify_state_susy(st, psi, method="symbolic")
                row["symbolic"] = sym["violation"]
                good &= sym["violation"] == 0
            row["supersymmetric"] = good
            ok &= good
            rows.append(row)
    return _status(ok), {"rows": rows}


def check_dynamics(model, psi):
    s1, _ = psi.symmetrize()
    k = norm_constants(s1)
    t = float(_param(model, "time"))
    tol = float(_param(model, "tol"))
    region = _chain(model)
    obs = a((0,) * psi.dimension) if psi.dimension > 1 else a(0)
    oracle = conjugation_oracle(s1, region, obs, t, tol)
    ladder = [Region.interval(-m, m) for m in range(0, 9)]
    comm = commutation_residual(psi, ladder, obs, t, 2)
    seq = [r["residual"] for r in comm]
    decays = all(b <= a_ for a_, b in zip(seq, seq[1:])) and seq[-1] == 0.0
    ok = oracle["within_tail_bound"] and decays
    return _status(ok), {
        "constants": k.to_dict(),
        "oracle": {key: oracle[key] for key in ("t", "N", "steps", "tail_bound", "oracle_difference", "within_tail_bound", "work_sites")},
        "commutation_ladder": [{"size": r["size"], "residual": r["residual"]} for r in comm],
        "commutation_decays": decays,
    }


_FACE_CACHE: dict = {}
_FACE_LOCK = threading.Lock()


def _face(model, psi):
    """Face and affiliation share one computation per model."""
    key = serialize_model(model)
    with _FACE_LOCK:
        if key not in _FACE_CACHE:
            _FACE_CACHE[key] = face_and_affiliation_checks(
                psi, _param(model, "face-region"), int(_param(model, "decompositions")), int(_param(model, "seed"))
            )
        return _FACE_CACHE[key]


def check_face(model, psi):
    r = _face(model, psi)
    flagged = r["contaminated_flagged"] or r["contaminated_violation"] is None
    out = {k: v for k, v in r.items() if k != "affiliation"}
    return _status(r["face_ok"] and flagged), out


def check_affiliation(model, psi):
    r = _face(model, psi)["affiliation"]
    ok = r["max_commutator"] <= 1e-10 and r["commutant_membership_defect"] <= 1e-10
    return _status(ok), r


def check_case2(model, psi):
    from .qft.checks import run_case2

    r = run_case2(
        int(_param(model, "modes")),
        int(_param(model, "cutoff")),
        int(_param(model, "grid")),
        float(_param(model, "dp")),
        float(_param(model, "amplitude")),
        float(_param(model, "kappa")),
    )
    return _status(case2_passes(r)), r


def case2_passes(r: dict) -> bool:
    exact = r["resolvent"]
    sp = r["space"]
    mol = r["mollifier"]
    return bool(
        max(exact["adjoint"], exact["scaling"], exact["resolvent_identity"]) <= 1e-12
        and all(r["resolvent_sweep"]["monotone"].values())
        and sp["clifford"] <= 1e-12
        and sp["Q_omega"] == 0
        and r["shell_spectrum"]["doublets_paired"]
        and r["wick"]["wick"]["residual"] <= 1e-8
        and r["wick"]["max_phi_delta"] <= 1e-4
        and mol["to_identity_decreasing"]
        and mol["delta_decreasing"]
        and mol["bounded"]
        and min(c["psd"] for c in r["covariance"])
    )


CHECK_FUNCS = {
    "nilpotent": check_nilpotent_item,
    "leibniz": check_leibniz,
    "susy-algebra": check_susy_algebra,
    "spectrum": check_spectrum,
    "states": check_states,
    "dynamics": check_dynamics,
    "face": check_face,
    "affiliation": check_affiliation,
    "case2": check_case2,
}

NEEDS_NILPOTENT = {"dynamics"}


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _run_one(name: str, model: ModelFile, psi) -> dict:
    t0 = time.perf_counter()
    try:
        if name in NEEDS_NILPOTENT and not check_nilpotent(psi).nilpotent:
            status, details = "fail", {"error": "charge assignment is not nilpotent"}
        else:
            status, details = CHECK_FUNCS[name](model, psi)
    except Exception as e:  # a crashing check is a failed check, and the report keeps the reason
        status, details = "fail", {"error": f"{type(e).__name__}: {e}"}
    return {"check": name, "status": status, "details": _clean(details), "seconds": time.perf_counter() - t0}


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("SUSYLAT_JOBS", "1")))
    except ValueError:
        return 1


def run_suite(model: ModelFile, suite=None, jobs: int | None = None) -> dict:
    """Run the selected checks (default: the model's suite, else all lattice checks)."""
    names = list(suite or model.suite or CASE_I)
    seen = []
    for n in names:
        if n not in CHECK_FUNCS:
            raise ValueError(f"unknown check {n!r}")
        if n not in seen:
            seen.append(n)
    psi = model.assignment()
    jobs = jobs or default_jobs()
    if jobs > 1 and len(seen) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(lambda n: _run_one(n, model, psi), seen))
    else:
        results = [_run_one(n, model, psi) for n in seen]
    return {
        "schema": SCHEMA,
        "model": model.to_dict(),
        "seed": int(_param(model, "seed")),
        "checks": results,
        "passed": all(r["status"] == "pass" for r in results),
    }


def strip_timing(report):
    if isinstance(report, dict):
        return {k: strip_timing(v) for k, v in report.items() if k not in TIMING_KEYS}
    if isinstance(report, list):
        return [strip_timing(v) for v in report]
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
