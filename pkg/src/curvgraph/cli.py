"""Command-line entry point: ``curvgraph <command> ...``."""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path
from typing import List, Optional

from . import invariants as inv
from .algebra import GraphPoly, format_poly, generator_counts, parse_poly, poly_from_json, poly_to_json
from .curvature import model_from_json, ricci, scalar
from .graphs import automorphisms, cycle_stats, enumerate_degree, format_graph
from .ihx import build_quotient, ihx_relations, normal_form, reduce_poly
from .suites import SUITES, run_suite

DEFAULT_MAX_DEGREE = 4
LARGE_MAX_DEGREE = 5


class CliError(Exception):
    pass


def max_degree(allow_large: bool) -> int:
    env = os.environ.get("CURVGRAPH_MAX_DEGREE")
    cap = DEFAULT_MAX_DEGREE
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise CliError(f"CURVGRAPH_MAX_DEGREE must be an integer, got {env!r}") from None
    return max(cap, LARGE_MAX_DEGREE) if allow_large else cap


def _check_degree(n: int, allow_large: bool):
    if n < 0:
        raise CliError("degree must be non-negative")
    cap = max_degree(allow_large)
    if n > cap:
        raise CliError(f"degree {n} exceeds the limit {cap}; pass --allow-large "
                       "or set CURVGRAPH_MAX_DEGREE")


# ---------------------------------------------------------------------------
# specs

def builtin_poly(name: str) -> Optional[GraphPoly]:
    simple = {"theta": inv.THETA, "dumbbell": inv.DUMBBELL,
              "sq-par": inv.SQ_PAR, "sq-cross": inv.SQ_CROSS}
    if name in simple:
        return GraphPoly.of(simple[name])
    if name == "theta3":
        return inv.theta3_poly()
    m = re.fullmatch(r"(pf|psi0):(\d+)", name)
    if m:
        n = int(m.group(2))
        _check_degree(n, False)
        return inv.pfaffian_poly(n) if m.group(1) == "pf" else inv.moment_poly(n)
    m = re.fullmatch(r"g3\.([1-5])", name)
    if m:
        return GraphPoly.of(inv.degree3_generators()[int(m.group(1)) - 1])
    return None


def load_poly(spec: str) -> GraphPoly:
    p = builtin_poly(spec)
    if p is not None:
        return p
    path = Path(spec)
    text = path.read_text() if path.is_file() else spec
    if text.lstrip().startswith("["):
        return poly_from_json(text)
    try:
        return parse_poly(text)
    except ValueError as exc:
        raise CliError(f"cannot read polynomial {spec!r}: {exc}") from None


def _shorthand_model(text: str) -> dict:
    """``constant m=4 c=1`` style: a type word followed by key=value pairs."""
    words = text.split()
    out = {"type": words[0]}
    for w in words[1:]:
        if "=" not in w:
            raise CliError(f"expected key=value in model spec, got {w!r}")
        k, v = w.split("=", 1)
        out[k] = float(v) if "." in v or "e" in v.lower() else int(v)
    return out


def load_model(spec: str):
    path = Path(spec)
    text = path.read_text() if path.is_file() else spec
    s = text.strip()
    try:
        data = json.loads(s) if s.startswith("{") else _shorthand_model(s)
        return model_from_json(data)
    except (ValueError, KeyError) as exc:
        raise CliError(f"cannot read model {spec!r}: {exc}") from None


# ---------------------------------------------------------------------------
# commands

def cmd_enumerate(args) -> int:
    _check_degree(args.degree, args.allow_large)
    rows = []
    for g in enumerate_degree(args.degree, args.connected_black):
        st = cycle_stats(g)
        rows.append({"graph": format_graph(g), "e": st.e, "g": st.g,
                     "autBar": automorphisms(g).autBar})
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        for r in rows:
            print(f"{r['graph']}  e={r['e']} g={r['g']} autBar={r['autBar']}")
    return 0


def cmd_dims(args) -> int:
    top = args.degree if args.degree is not None else DEFAULT_MAX_DEGREE
    _check_degree(top, args.allow_large)
    sizes = [len(enumerate_degree(n)) for n in range(top + 1)]
    dims = [build_quotient(n).stableDim for n in range(top + 1)]
    gens = [None] + generator_counts(dims)
    if args.format == "json":
        print(json.dumps([{"n": n, "classes": sizes[n], "stableDim": dims[n],
                           "generators": gens[n]} for n in range(top + 1)], indent=2))
    else:
        print("n  classes  stableDim  generators")
        for n in range(top + 1):
            print(f"{n:<2} {sizes[n]:<8} {dims[n]:<10} {'-' if gens[n] is None else gens[n]}")
    return 0


def cmd_eval(args) -> int:
    p = load_poly(args.poly)
    R = load_model(args.model)
    for n in p.degrees():
        _check_degree(n, args.allow_large)
    value = inv.eval_poly(p, R, args.strategy)
    cost = sum(inv.make_plan(g, R.m).estimatedCost for g in p.terms)
    out = {"value": value, "m": R.m, "kappa": scalar(R), "strategy": args.strategy,
           "planCost": cost, "terms": len(p)}
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        print(f"value     {value:.15g}")
        print(f"m         {R.m}")
        print(f"kappa     {out['kappa']:.15g}")
        print(f"strategy  {args.strategy} (plan cost {cost}, {len(p)} terms)")
    return 0


def cmd_delta(args) -> int:
    p = load_poly(args.poly)
    d = inv.delta_m(p)
    nf = reduce_poly(d)
    if args.format == "json":
        print(json.dumps({"delta": json.loads(poly_to_json(d)),
                          "normalForm": json.loads(poly_to_json(nf))}, indent=2))
    else:
        print("# delta_m")
        print(format_poly(d))
        print("# modulo IHX")
        print(format_poly(nf))
    return 0


def cmd_show(args) -> int:
    p = load_poly(args.poly)
    if args.reduce:
        p = reduce_poly(p)
    print(poly_to_json(p) if args.format == "json" else format_poly(p))
    return 0


def cmd_ihx_dump(args) -> int:
    _check_degree(args.degree, args.allow_large)
    rels = ihx_relations(args.degree)
    if args.format == "json":
        print(json.dumps([json.loads(poly_to_json(r)) for r in rels], indent=2))
    else:
        for k, r in enumerate(rels):
            print(f"# relation {k + 1}")
            print(format_poly(r))
    return 0


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    for n in names:
        if n not in SUITES:
            raise CliError(f"unknown suite {n!r}; choose from: all, " + ", ".join(SUITES))
    opts = {"seed": args.seed, "allow_large": args.allow_large, "tolerance": args.tolerance}
    reports = [run_suite(n, opts) for n in names]
    for r in reports:
        print(r.summary(), file=sys.stderr)
    if len(reports) == 1:
        print(reports[0].to_json(with_time=not args.stable))
    else:
        print("[\n" + ",\n".join(r.to_json(with_time=not args.stable) for r in reports) + "\n]")
    return 0 if all(r.overall for r in reports) else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curvgraph", description="Colored trivalent graphs as curvature invariants.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, degree=False, degree_required=False):
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--allow-large", action="store_true", help="permit degree 5")
        if degree:
            p.add_argument("--degree", type=int, required=degree_required)

    p = sub.add_parser("enumerate", help="list graph classes of one degree")
    common(p, True, True)
    p.add_argument("--connected-black", action="store_true")
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("dims", help="class counts, reduced dimensions, generator counts")
    common(p, True)
    p.set_defaults(fn=cmd_dims)

    p = sub.add_parser("eval", help="evaluate a graph polynomial on a curvature model")
    common(p)
    p.add_argument("--poly", required=True, help="builtin name, file or inline text")
    p.add_argument("--model", required=True, help="JSON file, inline JSON or 'constant m=4 c=1'")
    p.add_argument("--strategy", choices=("naive", "scheduled"), default="scheduled")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("delta", help="apply the curvature derivation")
    common(p)
    p.add_argument("--poly", required=True)
    p.set_defaults(fn=cmd_delta)

    p = sub.add_parser("show", help="print a polynomial, optionally modulo IHX")
    common(p)
    p.add_argument("--poly", required=True)
    p.add_argument("--reduce", action="store_true")
    p.set_defaults(fn=cmd_show)

    p = sub.add_parser("ihx", help="IHX relations")
    isub = p.add_subparsers(dest="ihx_command", required=True)
    d = isub.add_parser("dump", help="write the relations of one degree")
    common(d, True, True)
    d.set_defaults(fn=cmd_ihx_dump)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite", help="suite name or 'all'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--tolerance", type=float, default=None,
                   help="override the relative tolerance of numeric cases")
    p.add_argument("--stable", action="store_true", help="omit wall time for byte-stable output")
    p.set_defaults(fn=cmd_verify)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"curvgraph: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
