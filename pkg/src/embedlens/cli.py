"""Command-line front end: JSON reports, stable output, reproducible runs.

Every command emits {"manifest": ..., "result": ...} with a sha256 digest
of the canonically serialized result, so identical manifests produce
identical bytes. Exit codes: 0 success, 1 failed verify suite, 2
validation failure, 3 size guard, 4 parse error. Randomized modes require
an explicit --seed; there are no wall-clock defaults.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction

from . import __version__, acceptance, fixtures
from .correlation import exact_correlation, mc_correlation
from .dicttest import TestInstance, load_symbol_function, run_test_exact, run_test_mc, validate_instance
from .distributions import JointDistribution
from .embedding import connected, detect_embedding, pairwise_connected
from .errors import ParseError, SizeGuardError, ValidationError
from .functions import (
    ProductFunction,
    efron_stein,
    load_function_file,
    stability,
    uniform_measure,
)
from .reduction import (
    CouplingIdentityReport,
    build_paired_copies,
    build_star_coupling,
    check_coupling_identity,
    conditional_product_given_last,
    star_coupling_params,
)

EXIT_OK = 0
EXIT_SUITE_FAILED = 1
EXIT_VALIDATION = 2
EXIT_SIZE_GUARD = 3
EXIT_PARSE = 4


def _canonical(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def _emit(command: str, inputs: list[str], params: dict, result: dict,
          seed: int | None = None) -> None:
    digest = hashlib.sha256(_canonical(result).encode()).hexdigest()
    payload = {
        "manifest": {
            "tool": "embedlens",
            "version": __version__,
            "subcommand": command,
            "inputs": inputs,
            "params": params,
            "seed": seed,
            "digest": digest,
        },
        "result": result,
    }
    print(json.dumps(payload, sort_keys=True, indent=2))


def _fraction(text: str) -> Fraction:
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad rational {text!r}: {exc}") from exc


def _frac_pair(f: Fraction) -> list[int]:
    return [f.numerator, f.denominator]


def _load_dist(path: str) -> JointDistribution:
    return JointDistribution.load(path)


# ---------------------------------------------------------------------------
# Subcommand handlers

def _cmd_analyze(args) -> int:
    dist = _load_dist(args.dist)
    verdict = detect_embedding(dist)
    pc, split = pairwise_connected(dist)
    result = {
        "admits_embedding": verdict.admits,
        "modulus": verdict.witness.modulus if verdict.witness else None,
        "witness": verdict.witness.to_json() if verdict.witness else None,
        "snf_divisors": list(verdict.snf_divisors),
        "rank": verdict.rank,
        "columns": verdict.s,
        "connected": connected(dist),
        "pairwise_connected": pc,
        "disconnected_pair": None if split is None else {
            "i": split.i, "j": split.j,
            "side_i": sorted(split.side_i), "side_j": sorted(split.side_j),
        },
        "alpha": _frac_pair(dist.min_atom_mass()),
        "support_size": len(dist.support),
    }
    _emit("analyze", [args.dist], {}, result)
    return EXIT_OK


def _cmd_correlate(args) -> int:
    dist = _load_dist(args.dist)
    functions = [load_function_file(p) for p in args.functions]
    params = {"n": args.n, "mode": args.mode, "samples": args.samples,
              "sweep_n": args.sweep_n, "threads": args.threads}
    if args.sweep_n:
        rows = []
        for f in functions:
            if not isinstance(f, ProductFunction) or f.n != 1:
                raise ValidationError(
                    "--sweep-n needs single-row product functions (the row is repeated)")
        for n in range(1, args.sweep_n + 1):
            fs = [ProductFunction(f.alphabet, list(f.factors) * n) for f in functions]
            res = exact_correlation(dist, fs, n)
            rows.append((n, res.value.real, res.value.imag, abs(res.value)))
        if args.csv:
            print("n,re,im,abs")
            for row in rows:
                print(f"{row[0]},{row[1]!r},{row[2]!r},{row[3]!r}")
            return EXIT_OK
        result = {"sweep": [{"n": r[0], "value": [r[1], r[2]], "abs": r[3]} for r in rows]}
        _emit("correlate", [args.dist, *args.functions], params, result, args.seed)
        return EXIT_OK
    if args.n is None:
        raise ValidationError("--n is required unless --sweep-n is given")
    if args.mode == "exact":
        res = exact_correlation(dist, functions, args.n)
    else:
        if args.seed is None or args.samples is None:
            raise ValidationError("--mode mc requires --samples and --seed")
        res = mc_correlation(dist, functions, args.n, args.samples, args.seed)
    _emit("correlate", [args.dist, *args.functions], params, res.to_json(), args.seed)
    return EXIT_OK


def _cmd_stability(args) -> int:
    f = load_function_file(args.function)
    if isinstance(f, ProductFunction):
        f = f.to_table()
    nu = _load_dist(args.nu) if args.nu else uniform_measure(f.alphabet)
    value = stability(f, args.rho, nu)
    result: dict = {"stability": value, "rho": args.rho}
    if args.decompose:
        dec = efron_stein(f, nu)
        result["degree_weights"] = list(dec.degree_weights)
        result["norm_sq"] = dec.norm_sq
    _emit("stability", [args.function] + ([args.nu] if args.nu else []),
          {"rho": args.rho, "decompose": args.decompose}, result)
    return EXIT_OK


def _identity_json(rep: CouplingIdentityReport) -> dict:
    return {
        "lhs": [rep.lhs.real, rep.lhs.imag],
        "rhs": rep.rhs,
        "gap": rep.gap,
        "restriction_rate": _frac_pair(rep.restriction_rate),
        "p_star": _frac_pair(rep.p_star),
    }


def _cmd_reduce(args) -> int:
    dist = _load_dist(args.dist)
    params = {"op": args.op, "p_star": str(args.p_star) if args.p_star is not None else None,
              "p_nu": str(args.p_nu) if args.p_nu is not None else None,
              "rate": str(args.rate) if args.rate is not None else None, "n": args.n}
    inputs = [args.dist, *(args.functions or [])]
    if args.op == "paired-copies":
        out = build_paired_copies(dist)
        result = {"distribution": out.to_json(), "support_size": len(out.support)}
    elif args.op == "star-coupling":
        if args.p_star is None:
            raise ValidationError("--p-star is required for --op star-coupling")
        coupling_params = star_coupling_params(dist, args.p_star)
        if args.p_nu is not None:
            coupling_params.p_nu = args.p_nu
        coupling = build_star_coupling(coupling_params)
        pc, _ = pairwise_connected(coupling)
        result = {
            "distribution": coupling.to_json(),
            "pairwise_connected": pc,
            "p_nu": _frac_pair(coupling_params.p_nu),
            "p_star": _frac_pair(coupling_params.p_star),
            "min_atom_mass": _frac_pair(coupling.min_atom_mass()),
        }
    elif args.op == "conditional-product":
        if not args.functions:
            raise ValidationError("--op conditional-product needs --functions f1.json ... f_{k-1}.json")
        tables = []
        for p in args.functions:
            f = load_function_file(p)
            tables.append(f.to_table() if isinstance(f, ProductFunction) else f)
        out = conditional_product_given_last(dist, tables)
        result = {"function": out.to_json()}
    elif args.op == "coupling-identity":
        if not args.functions or args.n is None or args.p_star is None:
            raise ValidationError("--op coupling-identity needs --functions f1.json, --n and --p-star")
        f1 = load_function_file(args.functions[0])
        if isinstance(f1, ProductFunction):
            f1 = f1.to_table()
        alpha = dist.min_atom_mass()
        rate = args.rate if args.rate is not None else 1 - alpha * alpha
        rep = check_coupling_identity(dist, f1, args.n, rate, args.p_star)
        result = _identity_json(rep)
    else:  # pragma: no cover - argparse restricts choices
        raise ValidationError(f"unknown reduce op {args.op}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _emit("reduce", inputs, params, result)
    return EXIT_OK


def _cmd_dicttest(args) -> int:
    inst = TestInstance.load(args.instance)
    f = load_symbol_function(args.function)
    report = validate_instance(inst)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))
    params = {"mode": args.mode, "samples": args.samples, "n": f.n, "threads": args.threads}
    if args.mode == "exact":
        acc = run_test_exact(inst, f, f.n)
        result = {"acceptance": _frac_pair(acc), "acceptance_float": float(acc)}
    else:
        if args.seed is None or args.samples is None:
            raise ValidationError("--mode mc requires --samples and --seed")
        mc = run_test_mc(inst, f, args.samples, args.seed)
        result = mc.to_json()
    _emit("dicttest", [args.instance, args.function], params, result, args.seed)
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        results = acceptance.run_suite(args.suite)
    except KeyError as exc:
        raise ValidationError(str(exc)) from exc
    for r in results:
        print(r.line())
    summary = {
        "suite": args.suite,
        "criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                      "details": r.details} for r in results],
        "all_passed": all(r.passed for r in results),
    }
    _emit("verify", [], {"suite": args.suite}, summary)
    return EXIT_OK if summary["all_passed"] else EXIT_SUITE_FAILED


def _cmd_fixture(args) -> int:
    if args.name == "3lin-instance":
        fixtures.three_lin_instance().save(args.out)
    elif args.name == "a5-instance":
        fixtures.a5_instance().save(args.out)
    elif args.name in fixtures.NAMED:
        fixtures.NAMED[args.name]().save(args.out)
    else:
        raise ValidationError(
            f"unknown fixture {args.name!r}; choose from "
            f"{sorted(fixtures.NAMED) + ['3lin-instance', 'a5-instance']}")
    _emit("fixture", [], {"name": args.name, "out": args.out}, {"written": args.out})
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedlens",
        description="Exact embeddability, correlation and stability analysis "
                    "of k-ary distributions.")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker cap (current build runs serially)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="embeddability and connectivity report")
    p.add_argument("dist", help="distribution file (JSON)")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("correlate", help="k-wise correlation, exact or Monte Carlo")
    p.add_argument("dist")
    p.add_argument("functions", nargs="+", help="one function file per coordinate")
    p.add_argument("--n", type=int)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sweep-n", type=int, help="evaluate n = 1..N (single-row products)")
    p.add_argument("--csv", action="store_true", help="CSV rows for sweeps")
    p.set_defaults(fn=_cmd_correlate)

    p = sub.add_parser("stability", help="noise stability of a function")
    p.add_argument("function")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--nu", help="univariate measure file (default: uniform)")
    p.add_argument("--decompose", action="store_true", help="include degree weights")
    p.set_defaults(fn=_cmd_stability)

    p = sub.add_parser("reduce", help="reduction constructions and identity checks")
    p.add_argument("dist")
    p.add_argument("--op", required=True,
                   choices=["paired-copies", "star-coupling",
                            "conditional-product", "coupling-identity"])
    p.add_argument("--functions", nargs="*", help="function files where the op needs them")
    p.add_argument("--p-star", type=_fraction)
    p.add_argument("--p-nu", type=_fraction, help="override the derived pair-branch weight")
    p.add_argument("--rate", type=_fraction, help="restriction rate for coupling-identity")
    p.add_argument("--n", type=int)
    p.add_argument("--out", help="also write the result payload to this file")
    p.set_defaults(fn=_cmd_reduce)

    p = sub.add_parser("dicttest", help="dictatorship test acceptance")
    p.add_argument("instance")
    p.add_argument("function")
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=_cmd_dicttest)

    p = sub.add_parser("verify", help="run an acceptance suite")
    p.add_argument("suite", help="suite name or 'all'")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("fixture", help="write a named fixture to a file")
    p.add_argument("name")
    p.add_argument("out")
    p.set_defaults(fn=_cmd_fixture)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SizeGuardError as exc:
        print(f"size guard: {exc}", file=sys.stderr)
        return EXIT_SIZE_GUARD
    except ValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
