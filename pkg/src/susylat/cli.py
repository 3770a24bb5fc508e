"""Command-line interface: model validation, single checks, suite runs and matrix export.

Exit codes: 0 all checks pass, 1 a check failed, 2 parse or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import models
from .modelfile import CASE_I, CHECKS, ModelError, model_from_assignment, parse_model, parse_polynomial, parse_region, serialize_model

BUILTINS = {
    "nicolai": (models.nicolai, ["all"]),
    "nicolai-hermitian": (models.nicolai_hermitian, ["nilpotent"]),
    "majorana": (models.majorana, ["nilpotent", "leibniz"]),
    "zero": (models.zero, ["all"]),
    "nicolai-2d": (models.nicolai_2d, ["nilpotent", "leibniz"]),
}


class ConfigError(ValueError):
    pass


def load_model(arg: str):
    if arg in BUILTINS and not os.path.exists(arg):
        build, suite = BUILTINS[arg]
        psi = build()
        return model_from_assignment(psi, list(CASE_I) if suite == ["all"] else suite)
    try:
        with open(arg, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read model {arg!r}: {e.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"model {arg!r} is not UTF-8 text") from None
    return parse_model(text)


def _region(text: str | None, model, key: str = "region"):
    from .suite import _param

    if text is None:
        return _param(model, key)
    return parse_region(text)


def _emit(obj, out: str | None) -> None:
    from .suite import _clean

    text = json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args):
    model = load_model(args.model)
    again = parse_model(serialize_model(model))
    return 0, {"model": model.to_dict(), "round_trip": again == model, "serialized": serialize_model(model)}


def cmd_nilpotent(args):
    from .supercharge import check_nilpotent

    model = load_model(args.model)
    rep = check_nilpotent(model.assignment(), periods=args.periods)
    return (0 if rep.nilpotent else 1), rep.to_dict()


def cmd_charges(args):
    model = load_model(args.model)
    psi = model.assignment()
    region = _region(args.region, model)
    out = {"region": [list(s) for s in region.sorted()]}
    for label, p in (("charge", psi), ("charge_conjugate", psi.conjugate())):
        c = p.local_charge(region)
        out[label] = {"polynomial": str(c), "terms": len(c.terms), "support": [list(s) for s in c.support().sorted()]}
    s1, s2 = psi.symmetrize()
    out["symmetric"] = [str(s1.local_charge(region)), str(s2.local_charge(region))]
    return 0, out


def _operators(model, region):
    from .fock import FockRepresentation, build_susy_operators

    return build_susy_operators(FockRepresentation(region), model.assignment(), "open")


def cmd_hamiltonian(args):
    from .fock import hamiltonian_norm

    model = load_model(args.model)
    ops = _operators(model, _region(args.region, model))
    out = {"dimension": ops.H.shape[0], "nnz": int(ops.H.nnz), "norm_H": hamiltonian_norm(ops), "charge_terms": len(ops.charge.terms)}
    if args.export_mtx:
        import scipy.io

        scipy.io.mmwrite(args.export_mtx, ops.H, comment="H = Q Q* + Q* Q on the open region")
        out["exported"] = args.export_mtx
    return 0, out


def cmd_spectrum(args):
    from .suite import check_spectrum

    model = load_model(args.model)
    if args.region:
        model.params["region"] = parse_region(args.region)
    status, details = check_spectrum(model, model.assignment())
    return (0 if status == "pass" else 1), details


def cmd_evolve(args):
    from .car import a
    from .dynamics import EvolutionError, lie_series_evolve
    from .supercharge import check_nilpotent

    model = load_model(args.model)
    psi = model.assignment()
    if not check_nilpotent(psi).nilpotent:
        return 1, {"error": "charge assignment is not nilpotent"}
    region = _region(args.region, model)
    obs = parse_polynomial(args.observable) if args.observable else a((0,) * psi.dimension)
    s1, _ = psi.symmetrize()
    try:
        res = lie_series_evolve(s1, region, obs, args.time, tol=args.tol)
    except EvolutionError as e:
        return 1, {"error": str(e), "achieved": e.achieved}
    return 0, {**res.to_dict(), "orders": res.orders, "exact_norm": res.exact_norm}


def _single(name):
    def run(args):
        from .suite import run_suite

        model = load_model(args.model)
        if getattr(args, "sizes", None):
            model.params["state-sizes"] = args.sizes
        checks = [name] if name != "face" else ["face", "affiliation"]
        report = run_suite(model, checks, jobs=1)
        return (0 if report["passed"] else 1), report

    return run


def cmd_case2(args):
    from .qft.checks import run_case2
    from .suite import case2_passes

    r = run_case2(args.modes, args.cutoff, args.grid, args.dp, args.amplitude, args.kappa)
    return (0 if case2_passes(r) else 1), r


def cmd_run(args):
    from .suite import run_suite

    model = load_model(args.model)
    if args.seed is not None:
        model.params["seed"] = args.seed
    suite = None
    if args.suite:
        suite = list(CASE_I) if args.suite == ["all"] else args.suite
        bad = [s for s in suite if s not in CHECKS]
        if bad:
            raise ConfigError(f"unknown check(s): {', '.join(bad)}")
    report = run_suite(model, suite, jobs=args.jobs)
    return (0 if report["passed"] else 1), report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="susylat", description="Supersymmetric lattice fermion checks.")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, func, model=True, help=None):
        s = sub.add_parser(name, help=help)
        if model:
            s.add_argument("model", help=f"model file or builtin ({', '.join(BUILTINS)})")
        s.add_argument("--out", default=argparse.SUPPRESS, help="write the JSON report here")
        s.set_defaults(func=func)
        return s

    cmd("validate", cmd_validate, help="parse a model and check the round trip")
    s = cmd("nilpotent", cmd_nilpotent, help="exact delta^2 = 0 test")
    s.add_argument("--periods", type=int, default=2)
    s = cmd("charges", cmd_charges, help="local charges of a region")
    s.add_argument("--region")
    s = cmd("hamiltonian", cmd_hamiltonian, help="sparse Hamiltonian of a region")
    s.add_argument("--region")
    s.add_argument("--export-mtx", metavar="PATH")
    s = cmd("spectrum", cmd_spectrum, help="spectrum, kernel and doublet pairing")
    s.add_argument("--region")
    s = cmd("evolve", cmd_evolve, help="certified Lie series time evolution")
    s.add_argument("--region")
    s.add_argument("--time", type=float, required=True)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--observable", help="polynomial, default a at the origin")
    s = cmd("states", _single("states"), help="Fock and anti-Fock states")
    s.add_argument("--sizes", type=int, nargs="+")
    cmd("face", _single("face"), help="face and affiliation checks")
    s = cmd("case2", cmd_case2, model=False, help="truncated free field checks")
    s.add_argument("--modes", type=int, default=2)
    s.add_argument("--cutoff", type=int, default=4)
    s.add_argument("--grid", type=int, default=4096)
    s.add_argument("--dp", type=float, default=1.0)
    s.add_argument("--amplitude", type=float, default=0.5)
    s.add_argument("--kappa", type=float, default=1.0)
    s = cmd("run", cmd_run, help="run a verification suite")
    s.add_argument("--suite", nargs="+", help=f"checks among: {', '.join(CHECKS)}; all means every lattice check")
    s.add_argument("--seed", type=int)
    s.add_argument("--jobs", type=int, help="parallel checks (default SUSYLAT_JOBS or 1)")
    return p


def _glue_regions(argv: list[str]) -> list[str]:
    """Let '--region -3..3' through: argparse would read the value as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--region":
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt[1:2].isdigit():
                out.append(f"--region={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    from .qft.space import DimensionError

    parser = build_parser()
    argv = _glue_regions(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    try:
        code, obj = args.func(args)
    except (ModelError, ConfigError, DimensionError) as e:
        print(f"susylat: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"susylat: invalid configuration: {e}", file=sys.stderr)
        return 2
    _emit(obj, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
