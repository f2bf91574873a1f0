"""Command-line front end; every command prints one sorted JSON document.

Exit status: 0 ok, 2 refused by an enumeration/dimension guard, 1 any other
error.  Diagnostics go to stderr as a single line.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import catalog
from .core import (
    BellForgeError,
    FullCorrelationInequality,
    GeneralInequality,
    ParseError,
    Scenario,
    format_fraction,
    parse,
    to_document,
)
from .equivalence import CanonicalGuardExceeded, canonical_form, dehomogenize, equivalent, homogenize
from .lift import chsh_extend, compose_lift, decompose, four_term_extend
from .polytope import CapExceeded, enumerate_facets, general_lr_bound, lr_bound, tightness
from .quantum import DimensionCapExceeded, critical_visibility, maximize_ghz_violation, noise_value

REFUSALS = (CapExceeded, CanonicalGuardExceeded, DimensionCapExceeded)


class UsageError(BellForgeError):
    pass


def _round12(x):
    return float(f"{x:.12g}")


def load(source: str):
    """Read an inequality from a path, '-' (stdin) or 'catalog:<name>'."""
    if source.startswith("catalog:"):
        return catalog.get(source.split(":", 1)[1]).inequality
    if source == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(source) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {source}: {exc.strerror}") from None
    try:
        return parse(text)
    except ParseError as exc:
        raise ParseError(f"{source}: {exc.field}", str(exc).split(": ", 1)[1]) from None


def load_full(source: str) -> FullCorrelationInequality:
    ineq = load(source)
    if isinstance(ineq, GeneralInequality):
        if not ineq.is_full_correlation():
            raise UsageError(f"{source}: expected a full-correlation inequality")
        ineq = ineq.to_full()
    return ineq


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}") from None


# --- commands ------------------------------------------------------------------------

def cmd_bound(args):
    ineq = load(args.file)
    if isinstance(ineq, GeneralInequality):
        alg = abs(ineq.constant) + sum(abs(c) for c in ineq.terms.values())
        return {"lr_bound": format_fraction(general_lr_bound(ineq)), "algebraic_bound": format_fraction(alg)}
    return {"lr_bound": format_fraction(lr_bound(ineq)), "algebraic_bound": format_fraction(ineq.algebraic_value())}


def cmd_tight(args):
    return tightness(load_full(args.file), method=args.method).to_dict()


def cmd_facets(args):
    return enumerate_facets(Scenario(tuple(_ints(args.scenario, "--scenario")))).to_dict()


def cmd_extend(args):
    inputs = [load_full(f) for f in args.inputs]
    report = None
    if args.mode == "chsh":
        if len(inputs) != 2:
            raise UsageError("--mode chsh needs exactly two inputs")
        ineq = chsh_extend(*inputs)
    elif args.mode == "general":
        res = compose_lift(inputs, verify=False)
        ineq = res.inequality
    else:
        if len(inputs) != 1:
            raise UsageError("--mode four-term needs exactly one input")
        if not args.flip:
            raise UsageError("--mode four-term needs --flip i,j (1-based term positions)")
        base = inputs[0]
        keys = list(base.terms)
        pos = _ints(args.flip, "--flip")
        if len(pos) != 2 or not all(1 <= i <= len(keys) for i in pos):
            raise UsageError(f"--flip needs two term positions in 1..{len(keys)}")
        ineq = four_term_extend(base, [keys[i - 1] for i in pos])
    if args.verify:
        report = tightness(ineq).to_dict()
    return {"inequality": to_document(ineq), "report": report}


def cmd_decompose(args):
    ineq = load_full(args.file)
    return decompose(ineq, args.party - 1).to_dict()


def cmd_canonical(args):
    return to_document(canonical_form(load_full(args.file)), canonical=True)


def cmd_equivalent(args):
    return {"equivalent": equivalent(load_full(args.a), load_full(args.b))}


def cmd_dehomogenize(args):
    fixed = {}
    for item in (args.fix or "").split(","):
        if not item.strip():
            continue
        try:
            p, k = item.split("=")
            fixed[int(p) - 1] = int(k) - 1
        except ValueError:
            raise UsageError(f"--fix: expected party=setting pairs, got {item!r}") from None
    return to_document(dehomogenize(load(args.file), fixed))


def cmd_homogenize(args):
    g = load(args.file)
    if isinstance(g, FullCorrelationInequality):
        g = GeneralInequality.from_full(g)
    return to_document(homogenize(g))


def cmd_optimize(args):
    rep = maximize_ghz_violation(load_full(args.file), restarts=args.restarts, seed=args.seed)
    return rep.to_dict()


def cmd_vcrit(args):
    ineq = load_full(args.file)
    lr = lr_bound(ineq)
    return {
        "v_crit": _round12(critical_visibility(ineq, args.quantum_value, lr)),
        "lr_bound": format_fraction(lr),
        "noise_value": _round12(noise_value(ineq)),
        "quantum_value": _round12(args.quantum_value),
    }


def cmd_catalog(args):
    if args.action == "list":
        return {"entries": catalog.list_names()}
    if not args.name:
        raise UsageError(f"catalog {args.action} needs an entry name")
    if args.action == "get":
        return catalog.get(args.name).to_dict()
    result = catalog.check(args.name)
    args.failed = not all(v["pass"] for v in result.values())
    return {"name": args.name, "checks": result, "all_pass": not args.failed}


def cmd_reproduce(args):
    from . import reproduce

    results = reproduce.run_all(lambda r: print(r.line(), file=sys.stderr, flush=True))
    payload = reproduce.table(results)
    args.failed = not payload["all_pass"]
    return payload


# --- wiring --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bellforge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help, **kw):
        p = sub.add_parser(name, help=help, **kw)
        p.set_defaults(func=fn)
        return p

    p = add("bound", cmd_bound, "LR and algebraic bounds")
    p.add_argument("file")
    p = add("tight", cmd_tight, "face/facet report")
    p.add_argument("file")
    p.add_argument("--method", choices=("auto", "exact"), default="auto")
    p = add("facets", cmd_facets, "facets of a tiny correlation polytope")
    p.add_argument("--scenario", required=True, help="settings per party, e.g. 2,2")
    p = add("extend", cmd_extend, "lift faces to one more party")
    p.add_argument("--mode", choices=("chsh", "general", "four-term"), required=True)
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--flip", help="two 1-based term positions for --mode four-term")
    p.add_argument("--verify", action="store_true", help="attach a tightness report")
    p = add("decompose", cmd_decompose, "split along one party")
    p.add_argument("file")
    p.add_argument("--party", type=int, required=True, help="1-based party index")
    p = add("canonical", cmd_canonical, "orbit representative")
    p.add_argument("file")
    p = add("equivalent", cmd_equivalent, "same orbit under relabelling?")
    p.add_argument("a")
    p.add_argument("b")
    p = add("dehomogenize", cmd_dehomogenize, "fix settings to outcome +1")
    p.add_argument("file")
    p.add_argument("--fix", default="", help="party=setting pairs, 1-based, e.g. 1=2,2=1")
    p = add("homogenize", cmd_homogenize, "general -> full correlation")
    p.add_argument("file")
    p = add("optimize", cmd_optimize, "GHZ value over equatorial settings")
    p.add_argument("file")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p = add("vcrit", cmd_vcrit, "critical visibility for a quantum value")
    p.add_argument("file")
    p.add_argument("--quantum-value", type=float, required=True)
    p = add("catalog", cmd_catalog, "shipped inequalities")
    p.add_argument("action", choices=("list", "get", "check"))
    p.add_argument("name", nargs="?")
    add("reproduce", cmd_reproduce, "run every acceptance criterion")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.failed = False
    try:
        payload = args.func(args)
    except REFUSALS as exc:
        print(f"bellforge: refused: {exc}", file=sys.stderr)
        return 2
    except (BellForgeError, ValueError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"bellforge: error: {msg}", file=sys.stderr)
        return 1
    print(json.dumps(payload, sort_keys=True, indent=2))
    if args.failed:
        print(f"bellforge: {args.command}: some checks failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
