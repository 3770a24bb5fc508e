import json
from pathlib import Path

import pytest
import scipy.io

from susylat.cli import main
from susylat.modelfile import parse_model
from susylat.suite import SCHEMA, dumps, run_suite, strip_timing

MODELS = Path(__file__).parent.parent / "models"


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_nicolai_case_one_suite_passes():
    report = run_suite(parse_model((MODELS / "nicolai.model").read_text()))
    assert report["schema"] == SCHEMA and report["seed"] == 0
    assert [c["check"] for c in report["checks"]] == ["nilpotent", "leibniz", "susy-algebra", "spectrum", "states", "dynamics", "face", "affiliation"]
    assert report["passed"], [c for c in report["checks"] if c["status"] != "pass"]


def test_zero_model_passes_with_trivial_spectra(capsys):
    code, out, _ = run_cli(capsys, "run", str(MODELS / "zero.model"))
    assert code == 0
    report = json.loads(out)
    spec = next(c for c in report["checks"] if c["check"] == "spectrum")["details"]
    assert spec["norm_H"] == 0 and spec["doublet_count"] == 0


def test_non_nilpotent_model_fails_with_counterexample(capsys):
    code, out, _ = run_cli(capsys, "run", str(MODELS / "nicolai_hermitian.model"))
    assert code == 1
    details = json.loads(out)["checks"][0]["details"]
    assert details["counterexample"] == "a(0)" and details["delta_squared"]


def test_dynamics_skipped_for_non_nilpotent():
    model = parse_model((MODELS / "nicolai_hermitian.model").read_text())
    report = run_suite(model, ["dynamics"])
    assert report["checks"][0]["status"] == "fail"
    assert "not nilpotent" in report["checks"][0]["details"]["error"]


def test_report_is_deterministic_across_job_counts():
    model = parse_model((MODELS / "nicolai.model").read_text())
    suite = ["nilpotent", "leibniz", "spectrum", "affiliation"]
    r1 = dumps(strip_timing(run_suite(model, suite, jobs=1)))
    r2 = dumps(strip_timing(run_suite(model, suite, jobs=3)))
    assert r1 == r2


def test_seed_changes_random_checks_only():
    text = (MODELS / "nicolai.model").read_text()
    a = run_suite(parse_model(text), ["leibniz"])
    b = run_suite(parse_model(text.replace("param seed = 0", "param seed = 5")), ["leibniz"])
    assert a["seed"] == 0 and b["seed"] == 5
    assert a["passed"] and b["passed"]


def test_jobs_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("SUSYLAT_JOBS", "2")
    code, out, _ = run_cli(capsys, "run", "nicolai", "--suite", "nilpotent", "leibniz")
    assert code == 0 and json.loads(out)["passed"]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = run_cli(capsys, "--out", str(target), "nilpotent", "nicolai")
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["nilpotent"] is True


@pytest.mark.parametrize(
    "text,needle",
    [
        ("name x\ndimension 1\nperiod 1\nrange 1\npattern {0}: a(0) a+(0)\n", "5:13: semantic error"),
        ("name x\ndimension 1\nperiod 1\nrange 1\npattern {0}: a(7)\n", "outside"),
        ("name x\ndimension 1\nperiod 1\nrange 1\npattern {0}: a(0) ?\n", "lexical"),
    ],
)
def test_parse_errors_exit_2(tmp_path, capsys, text, needle):
    p = tmp_path / "bad.model"
    p.write_text(text)
    code, out, err = run_cli(capsys, "validate", str(p))
    assert code == 2 and needle in err and out == ""


def test_config_errors_exit_2(capsys):
    assert run_cli(capsys, "validate", "/no/such/model")[0] == 2
    assert run_cli(capsys, "run", "nicolai", "--suite", "bogus")[0] == 2
    assert run_cli(capsys, "frobnicate")[0] == 2
    assert run_cli(capsys, "case2", "--modes", "8", "--cutoff", "8")[0] == 2
    assert run_cli(capsys, "spectrum", "nicolai", "--region", "3..")[0] == 2


def test_validate_round_trip(capsys):
    code, out, _ = run_cli(capsys, "validate", str(MODELS / "nicolai.model"))
    assert code == 0 and json.loads(out)["round_trip"] is True


def test_charges_and_hamiltonian_export(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "charges", "nicolai", "--region", "0..1")
    assert code == 0
    assert json.loads(out)["charge"]["polynomial"] == "a+(0) a(-1) a(1) + a+(2) a(1) a(3)"
    mtx = tmp_path / "h.mtx"
    code, out, _ = run_cli(capsys, "hamiltonian", "nicolai", "--region", "-3..3", "--export-mtx", str(mtx))
    assert code == 0 and json.loads(out)["dimension"] == 128
    H = scipy.io.mmread(str(mtx)).tocsr()
    assert H.shape == (128, 128) and abs(H - H.conj().T).max() == 0


def test_spectrum_states_face_evolve(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "nicolai", "--region", "-1..1")
    r = json.loads(out)
    assert code == 0 and r["kernel_dim_even"] + r["kernel_dim_odd"] == 6 and r["doublet_count"] == 1
    assert run_cli(capsys, "states", "nicolai", "--sizes", "3", "5")[0] == 0
    assert run_cli(capsys, "face", "zero")[0] == 0
    code, out, _ = run_cli(capsys, "evolve", "nicolai", "--region", "-1..1", "--time", "1e-70", "--observable", "a+(0) a(1)")
    r = json.loads(out)
    assert code == 0 and r["tail_bound"] <= 1e-8 and r["steps"] == 1


def test_evolve_refuses_non_nilpotent(capsys):
    code, out, _ = run_cli(capsys, "evolve", "nicolai-hermitian", "--time", "1e-3")
    assert code == 1 and "not nilpotent" in json.loads(out)["error"]
