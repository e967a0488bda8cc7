"""Command line: ``python -m dring <command> [options]``.

Exit status 0 when every check passes, 1 when a check fails (a witness is
reported), 2 on unreadable input or conflicting options.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import covering as cov
from .fgl import (InvalidLaw, OrderTwoRequired, SolverInconsistency, additive_law, check_fgl,
                  lubin_twist, universal_order_two, validate_fgl)
from .model import (MissingCoefficientAction, check_D1, check_D2, check_D3, check_grading,
                    check_homomorphism, euler_total, CompatibilityViolated, make_model)
from .parse import ParseError, dumps, identifiers, parse_polynomial, parse_series, series_to_json
from .series import Var, make_ring
from .steenrod import NonAdditiveModel, NonHomogeneous, OpWord, adem_normalize, compose_ops

FGL_TRUNC = 8
SQ_TRUNC = 12


class ConfigError(ValueError):
    pass


def read_input(args) -> str:
    if getattr(args, "expr", None) is not None:
        if getattr(args, "file", None):
            raise ConfigError("give either --expr or --file, not both")
        return args.expr
    if getattr(args, "file", None):
        with open(args.file) as fh:
            return fh.read()
    return sys.stdin.read()


def parse_law(text: str, trunc: int):
    """Read a law in x, y; other identifiers become generators of degree 1-(i+j)."""
    poly = parse_polynomial(text)
    gens = [n for n in identifiers(poly) if n not in ("x", "y")]
    degs = {}
    for mon in sorted(poly, key=lambda m: (sum(e for n, e in m if n in "xy"), m)):
        d = dict(mon)
        for g in gens:
            if g in d and g not in degs and d[g] == 1:
                degs[g] = 1 - d.get("x", 0) - d.get("y", 0)
    ring = make_ring([(g, degs.get(g, -1)) for g in gens], max(trunc - 1, 0))
    return parse_series(text, [Var("x"), Var("y")], trunc, ring)


def parse_model(spec: str, default_n: int):
    opts = {"k": 1, "n": default_n, "a": 1}
    if spec:
        for part in spec.split(","):
            if "=" not in part:
                raise ConfigError(f"bad --model entry {part!r}, expected key=value")
            k, v = part.split("=", 1)
            k = k.strip()
            if k not in opts:
                raise ConfigError(f"unknown --model key {k!r}")
            try:
                opts[k] = int(v)
            except ValueError:
                raise ConfigError(f"--model {k} must be an integer") from None
    if opts["a"] not in (1, 2):
        raise ConfigError("--model a must be 1 or 2")
    if opts["k"] < 1 or opts["n"] < 1:
        raise ConfigError("--model k and n must be positive")
    names = ["t"] if opts["k"] == 1 else [f"t{i}" for i in range(1, opts["k"] + 1)]
    return [(n, opts["n"]) for n in names], opts["a"]


def emit(args, obj, text):
    if args.json:
        print(dumps(obj))
    else:
        print(text)


# -- commands ------------------------------------------------------------------------------

def cmd_fgl_check(args):
    F = parse_law(read_input(args), args.trunc)
    rep = check_fgl(F)
    emit(args, {"law": str(F), "report": rep.to_json()}, rep.message)
    return 0 if rep.ok else 1


def cmd_fgl_twist(args):
    F = parse_law(read_input(args), args.trunc)
    try:
        law = validate_fgl(F)
        Ft = lubin_twist(law, truncation=args.trunc)
    except InvalidLaw as exc:
        emit(args, {"error": str(exc), "report": exc.report.to_json()}, f"not a law: {exc}")
        return 1
    except (OrderTwoRequired, SolverInconsistency) as exc:
        emit(args, {"error": str(exc)}, str(exc))
        return 1
    emit(args, {"twist": series_to_json(Ft.F), "text": str(Ft), "flags": Ft.flags}, str(Ft))
    return 0


def cmd_fgl_universal(args):
    U = universal_order_two(args.trunc)
    obj = {"law": series_to_json(U.F), "text": str(U), "flags": U.flags,
           "generators": [{"name": n, "deg": d, "position": list(U.positions[n])}
                          for n, d in U.ring.generators]}
    lines = [str(U)] + [f"{n}: degree {d}, coefficient of x^{U.positions[n][0]} y^"
                        f"{U.positions[n][1]}" for n, d in U.ring.generators]
    emit(args, obj, "\n".join(lines))
    return 0


def _model_from_args(args, default_n):
    vars_, a = parse_model(args.model, default_n)
    if args.universal:
        law = universal_order_two(args.universal)
    elif args.expr is not None or args.file:
        law = validate_fgl(parse_law(read_input(args), args.trunc))
    else:
        law = additive_law(args.trunc)
    return make_model(law, a, vars_, truncation=args.trunc)


def cmd_dring_verify(args):
    D = _model_from_args(args, default_n=args.trunc + 1)
    samples = D.default_samples(seed=args.seed)
    reports = [check_D1(D, samples)]
    if D.ring.ngens:
        reports.append(check_D2(D))
    reports.append(check_D3(D, samples))
    reports.append(check_grading(D, samples))
    rng = random.Random(args.seed)
    pairs = [(D.random_element(rng), D.random_element(rng)) for _ in range(args.pairs)]
    reports.append(check_homomorphism(D, pairs))
    euler = {"axiom": "euler", "failures": []}
    for v in D.carrier_vars:
        try:
            euler_total(D, v.name)
        except CompatibilityViolated as exc:
            euler["failures"].append({"element": v.name, "witness_monomial": str(exc)})
    out = [r.to_json() for r in reports] + [euler]
    ok = all(not r["failures"] for r in out)
    text = "\n".join(f"{r['axiom']}: {'ok' if not r['failures'] else 'FAILED'}"
                     + (f" to degree {r['verified_degree']}" if r.get("verified_degree") else "")
                     + "".join(f"\n  {f['element']}: {f['witness_monomial']}"
                               for f in r["failures"][:3]) for r in out)
    emit(args, {"model": repr(D), "reports": out, "ok": ok}, text)
    return 0 if ok else 1


def cmd_sq_eval(args):
    if not args.op or not args.elem:
        raise ConfigError("sq-eval needs --op and --elem")
    D = _model_from_args(args, default_n=2 * args.trunc + 1)
    w = OpWord.parse(args.op)
    x = D.parse(args.elem)
    y = compose_ops(D, w, x)
    emit(args, {"op": str(w), "elem": str(x), "result": str(y)}, str(y))
    return 0


def cmd_adem(args):
    if not args.op:
        raise ConfigError("adem-normalize needs --op")
    w = OpWord.parse(args.op)
    words = adem_normalize(w)
    text = " + ".join(str(v) for v in words) or "0"
    obj = {"word": str(w), "normal_form": [str(v) for v in words]}
    status = 0
    if args.verify:
        k = max(1, sum(w.degrees))
        D = make_model(additive_law(1), 1, [(f"t{i}", 2 * k + 1) for i in range(1, k + 1)],
                       truncation=2 * sum(w.degrees) + k)
        from .steenrod import apply_sum
        bad = [str(m) for m in D.carrier_monomials(k)
               if compose_ops(D, w, m) != apply_sum(D, words, m)]
        obj["verified_on"] = f"monomials of degree <= {k} in {k} variables"
        obj["disagreements"] = bad
        status = 1 if bad else 0
    emit(args, obj, text)
    return status


def cmd_cover_calc(args):
    data = json.loads(read_input(args))
    if "p" in data:
        p = cov.FiniteCovering.from_json(data["p"])
        q = cov.FiniteCovering.from_json(data.get("q", data["p"]))
    else:
        p = q = cov.FiniteCovering.from_json(data)
    rep = cov.calculus_report(p, q)
    X = list(range(args.xsize))
    rep["composite_power"] = cov.composite_power_check(p, q, X, seed=args.seed)
    rep["composite_total"] = cov.composite_total_bijection(p, q)
    rep["extended_power_size"] = {"p": len(cov.extended_power(p, X)),
                                  "formula": p.poly()(len(X))}
    if len(set(p.sizes)) == 1:
        rep["frames"] = cov.check_frames(p, X[:3])
    checks = [v for k, v in rep.items() if isinstance(v, bool)]
    checks.append(rep["composite_power"]["bijective"])
    if "frames" in rep:
        checks.append(rep["frames"]["bijective"] and rep["frames"]["free"])
    ok = all(checks)
    text = "\n".join(f"{k}: {v}" for k, v in rep.items())
    emit(args, rep, text)
    return 0 if ok else 1


COMMANDS = {
    "fgl-check": (cmd_fgl_check, FGL_TRUNC, "validate a formal group law in x, y"),
    "fgl-twist": (cmd_fgl_twist, FGL_TRUNC, "Lubin twist F_t of an order-two law"),
    "fgl-universal": (cmd_fgl_universal, FGL_TRUNC, "universal order-two law to --trunc"),
    "dring-verify": (cmd_dring_verify, SQ_TRUNC, "check D-ring axioms on a model"),
    "sq-eval": (cmd_sq_eval, SQ_TRUNC, "apply a word of operations to an element"),
    "adem-normalize": (cmd_adem, SQ_TRUNC, "admissible form of a word of squares"),
    "cover-calc": (cmd_cover_calc, SQ_TRUNC, "calculus of finite coverings"),
}


def build_parser():
    ap = argparse.ArgumentParser(prog="dring", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, default, helptext) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--trunc", type=int, default=default, help=f"truncation (default {default})")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--file", help="read input from a file instead of stdin")
        sp.add_argument("--expr", help="input given inline")
        if name in ("dring-verify", "sq-eval"):
            sp.add_argument("--model", default="", help="k=<vars>,n=<order>,a=<1|2>")
            sp.add_argument("--universal", type=int, default=0,
                            help="use the universal order-two law to this degree")
        if name == "dring-verify":
            sp.add_argument("--pairs", type=int, default=20)
        if name in ("sq-eval", "adem-normalize"):
            sp.add_argument("--op", help='word such as "Sq^2 Sq^1"')
        if name == "sq-eval":
            sp.add_argument("--elem", help="carrier element such as t^2 or t1*t2")
        if name == "adem-normalize":
            sp.add_argument("--verify", action="store_true",
                            help="compare both sides on a polynomial model")
        if name == "cover-calc":
            sp.add_argument("--xsize", type=int, default=2, help="size of the test set X")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.trunc < 1:
        print("error: --trunc must be at least 1", file=sys.stderr)
        return 2
    func = COMMANDS[args.command][0]
    try:
        return func(args)
    except (ParseError, ConfigError, json.JSONDecodeError, NonHomogeneous, NonAdditiveModel,
            MissingCoefficientAction, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
