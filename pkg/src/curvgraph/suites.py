"""Named verification suites with JSON reports.

Each suite is a function returning a list of cases; cases of one suite run
on a thread pool and the report lists them sorted by name, so the JSON is
byte-stable for fixed seeds.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np

from . import invariants as inv
from .algebra import GraphPoly, expand_tetravalent, generator_counts
from .curvature import (
    constant_model, der_sym, direct_sum, hamilton_Q, make_einstein, norm_sq,
    pad, phi_plus, q_star, random_model, random_orthogonal, ricci, rotate,
    grassmann_moment_mc, zero_model,
)
from .exactalg import PolyM, RatFuncM
from .graphs import EMPTY, connected_components, disjoint_union, enumerate_degree
from .ihx import build_quotient, connected_black_rank, ihx_relations, stable_dims

__all__ = ["Case", "SuiteReport", "SUITES", "run_suite", "UnknownSuite"]


class UnknownSuite(KeyError):
    pass


@dataclass
class Case:
    name: str
    expected: object
    actual: object
    tolerance: Optional[float]
    passed: bool
    gap: Optional[float] = None  # relative gap, when the tolerance is relative

    def to_dict(self):
        return {"name": self.name, "expected": _plain(self.expected),
                "actual": _plain(self.actual), "tolerance": self.tolerance,
                "pass": bool(self.passed)}


@dataclass
class SuiteReport:
    suiteName: str
    cases: List[Case] = field(default_factory=list)
    wallTime: float = 0.0

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.cases)

    def to_json(self, with_time: bool = True) -> str:
        d = {"suiteName": self.suiteName,
             "cases": [c.to_dict() for c in self.cases],
             "overall": self.overall}
        if with_time:
            d["wallTime"] = round(self.wallTime, 3)
        return json.dumps(d, indent=2, sort_keys=True)

    def summary(self) -> str:
        bad = [c.name for c in self.cases if not c.passed]
        head = f"{self.suiteName}: {len(self.cases) - len(bad)}/{len(self.cases)} passed"
        return head + (" (failed: " + ", ".join(bad) + ")" if bad else "") + f" in {self.wallTime:.1f}s"


def _plain(x):
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        return float(f"{x:.12g}") if math.isfinite(x) else str(x)
    if isinstance(x, (list, tuple)):
        return [_plain(y) for y in x]
    if isinstance(x, np.floating):
        return _plain(float(x))
    return str(x)


def rel_gap(a: float, b: float, scale: Optional[float] = None) -> float:
    s = max(abs(a), abs(b)) if scale is None else scale
    return abs(a - b) / s if s > 0 else 0.0


def close(name: str, expected: float, actual: float, tol: float, scale=None) -> Case:
    gap = rel_gap(expected, actual, scale)
    return Case(name, expected, actual, tol, gap <= tol, gap)


def exact(name: str, expected, actual) -> Case:
    return Case(name, expected, actual, None, expected == actual)


# ---------------------------------------------------------------------------
# suites; each entry takes an options dict and returns a list of thunks

Thunk = Callable[[], List[Case]]


def _dims(opts) -> List[Thunk]:
    top = 5 if opts.get("allow_large") else 4
    want_dims = [1, 1, 3, 8, 26, 90][:top + 1]
    want_gen = [1, 2, 5, 15, 54][:top]
    want_conn = [(1, 0), (2, 0), (5, 0), (17, 2)]

    def dims():
        t = time.time()
        d = stable_dims(top)
        return [exact("stable-dims", want_dims, d),
                Case("stable-dims-runtime", "< 60 s" if top == 4 else "< 600 s",
                     round(time.time() - t, 2), None, time.time() - t < (60 if top == 4 else 600)),
                exact("generator-counts", want_gen, generator_counts(d))]

    def conn():
        return [exact(f"connected-black-{n}", want_conn[n - 1], connected_black_rank(n))
                for n in range(1, 5)]

    return [dims, conn]


def _delta_rows():
    m = PolyM.m()
    P = lambda *c: PolyM(c)
    deg2 = [
        ("theta", inv.THETA, {EMPTY: P(0, 2, -2)}),
        ("sq-par", inv.SQ_PAR, {inv.THETA: -4 * (m - 1)}),
        ("sq-cross", inv.SQ_CROSS, {inv.THETA: P(12)}),
    ]
    rows = inv._fingerprint_rows()
    return deg2, rows


def _delta_table(opts) -> List[Thunk]:
    def run():
        cases = []
        deg2, rows = _delta_rows()
        for name, g, want in deg2:
            got = inv.reduce_poly(inv.delta_m(GraphPoly.of(g)))
            cases.append(exact(f"delta-{name}", str(GraphPoly(want, "polym")), str(got)))
        gens = inv.degree3_generators()
        q2 = build_quotient(2)
        for k, (g, want) in enumerate(zip(gens, rows)):
            got = q2.normal_form(inv.delta_m(GraphPoly.of(g)))
            cases.append(exact(f"delta-g3.{k + 1}", str(GraphPoly(want, "polym")), str(got)))
        return cases
    return [run]


def _const_values(opts) -> List[Thunk]:
    def symbolic():
        g = inv.degree3_generators()
        m = PolyM.m()
        den = PolyM((0, 0, 1)) * (m - 1) * (m - 1)
        want_b = RatFuncM(8 * (2 * m - 5), den)
        want_a = RatFuncM(-8 * (m + 11), den)
        got_b = inv.const_value_symbolic(GraphPoly.of(g[3]))[3]
        got_a = inv.const_value_symbolic(GraphPoly.of(g[4]))[3]
        return [exact("hexagon-g3.4", str(want_b), str(got_b)),
                exact("hexagon-g3.5", str(want_a), str(got_a))]

    def numeric(m):
        def run():
            worst, where = 0.0, ""
            kappa = 1.7
            R = constant_model(m, kappa / (m * (m - 1)))
            for n in (1, 2, 3):
                for g in enumerate_degree(n):
                    a = inv.const_value(GraphPoly.of(g), m, kappa)
                    b = inv.eval_graph(g, R)
                    gap = rel_gap(a, b, max(abs(a), abs(b), kappa ** n))
                    if gap > worst:
                        worst, where = gap, str(g)
            return [Case(f"numeric-m{m}", "gap <= 1e-9", [worst, where], 1e-9, worst <= 1e-9, worst)]
        return run

    return [symbolic] + [numeric(m) for m in range(3, 7)]


def _gauss_bonnet(opts) -> List[Thunk]:
    def run():
        cases = [close(f"chi-S{m}", 2.0, inv.gauss_bonnet_sphere(m), 1e-9, 1.0) for m in (2, 4, 6)]
        v = inv.eval_poly(inv.pfaffian_poly(2), constant_model(3, 1.0))
        cases.append(Case("pf2-vanishes-m3", 0.0, v, 1e-10, abs(v) <= 1e-10 * 36))
        return cases
    return [run]


def _norm12(opts) -> List[Thunk]:
    def run():
        cases = []
        dr = inv.double_r_square()
        exp = expand_tetravalent(dr)
        for seed in range(5):
            R = random_model(4 + seed % 3, 3, seed)
            r2 = norm_sq(R)
            sec2 = 0.25 * float(np.sum(phi_plus(R).comp ** 2))
            cases.append(close(f"sec-norm-{seed}", 12 * r2, sec2, 1e-10))
            cases.append(close(f"sec-norm-graph-{seed}", 12 * r2, 0.25 * inv.eval_graph(inv.SEC_NORM, R), 1e-10))
            cases.append(close(f"double-r-ext-{seed}", r2, inv.eval_ext(dr, R), 1e-10))
            cases.append(close(f"double-r-expanded-{seed}", r2, inv.eval_poly(exp, R), 1e-10))
        nf = inv.reduce_poly(exp)
        want = inv.reduce_poly(GraphPoly({inv.SEC_NORM: Fraction(1, 48)}))
        cases.append(exact("double-r-normal-form", str(want), str(nf)))
        return cases
    return [run]


def _pfaffian_defn(opts) -> List[Thunk]:
    def run(m, n):
        def go():
            worst = 0.0
            poly = inv.pfaffian_poly(n)
            for seed in range(10):
                R = random_model(m, 3, 1000 * m + seed)
                a, b = inv.pfaffian_defn_eval(n, R), inv.eval_poly(poly, R)
                worst = max(worst, rel_gap(a, b))
            return [Case(f"pf{n}-m{m}", "gap <= 1e-9", worst, 1e-9, worst <= 1e-9, worst)]
        return go
    return [run(m, n) for m in (4, 5) for n in (1, 2)]


def _psi_closure(opts) -> List[Thunk]:
    def run(m, n):
        def go():
            worst = 0.0
            poly = inv.moment_poly(n)
            for seed in range(10):
                R = random_model(m, 3, 2000 * m + seed)
                a, b = inv.psi_defn_eval(n, R), inv.eval_poly(poly, R)
                worst = max(worst, rel_gap(a, b))
            return [Case(f"psi{n}-m{m}", "gap <= 1e-9", worst, 1e-9, worst <= 1e-9, worst)]
        return go
    return [run(m, n) for m in (4, 5) for n in (1, 2, 3)]


def _moments_mc(opts) -> List[Thunk]:
    seed = int(opts.get("seed", 0))
    samples = int(opts.get("samples", 100_000))

    def constant():
        worst = 0.0
        for m in range(3, 9):
            R = constant_model(m, 1.0)
            for n in (1, 2, 3):
                worst = max(worst, abs(inv.moment_value(n, R) - 1.0))
        return [Case("constant-moments", 1.0, 1.0 + worst, 1e-9, worst <= 1e-9)]

    def mc(k):
        def go():
            R = random_model(4, 3, 300 + k)
            want = inv.moment_value(2, R)
            mean, se = grassmann_moment_mc(R, 2, samples, seed + k)
            z = abs(mean - want) / se
            return [Case(f"mc-psi2-{k}", want, [mean, se, z], 4.0, z <= 4.0)]
        return go

    return [constant] + [mc(k) for k in range(3)]


def _cubic_lemma(opts) -> List[Thunk]:
    def theta():
        worst = 0.0
        poly = inv.theta3_poly()
        for k in range(20):
            R = random_model(4 + k % 3, 3, 500 + k)
            worst = max(worst, rel_gap(inv.eval_poly(poly, R), inv.theta3_numeric(R)))
        c = constant_model(5, 1.0)
        gap_c = rel_gap(inv.eval_poly(poly, c), inv.theta3_numeric(c))
        z = inv.eval_poly(poly, zero_model(4))
        return [Case("theta3-random", "gap <= 1e-9", worst, 1e-9, worst <= 1e-9, worst),
                Case("theta3-constant", "gap <= 1e-9", gap_c, 1e-9, gap_c <= 1e-9, gap_c),
                Case("theta3-zero", 0.0, z, 0.0, z == 0.0)]

    def hamilton():
        worst = 0.0
        for k in range(5):
            R = random_model(4 + k % 3, 3, 600 + k)
            lhs = q_star(R, R).comp
            rhs = 0.5 * der_sym(ricci(R), R).comp + hamilton_Q(R).comp
            worst = max(worst, float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs))))
        return [Case("hamilton-decomposition", "gap <= 1e-9", worst, 1e-9, worst <= 1e-9, worst)]

    return [theta, hamilton]


def _einstein_models():
    out = [(f"constant-m{m}", constant_model(m, 1.0)) for m in range(3, 9)]
    out.append(("S2xS2", direct_sum(constant_model(2, 1.0), constant_model(2, 1.0))))
    out.append(("S2xS3", direct_sum(constant_model(2, 2.0), constant_model(3, 1.0))))
    out.append(("S3xS3", direct_sum(constant_model(3, 1.0), constant_model(3, 1.0))))
    out.append(("S2xS2xS2", direct_sum(direct_sum(constant_model(2, 1.0), constant_model(2, 1.0)),
                                       constant_model(2, 1.0))))
    for seed in range(3):
        out.append((f"projected-random-{seed}", make_einstein(random_model(5 + seed, 3, 700 + seed))))
    return out


def _einstein_cubic(opts) -> List[Thunk]:
    def run():
        cases = []
        for name, R in _einstein_models():
            rep = inv.einstein_identity(R, 1e-9)
            cases.append(Case(name, rep["rhs"], rep["lhs"], 1e-9, rep["relative_gap"] <= 1e-9, rep["relative_gap"]))
        return cases
    return [run]


def _einstein_symbolic(opts) -> List[Thunk]:
    def combo():
        split = inv.split_einstein(inv.einstein_reduce(inv.einstein_combination()))
        s, r = inv.expected_identity_rhs()
        return [exact("identity-scalar", str(s), str(split.scalar)),
                exact("identity-norm", str(r), str(split.norm)),
                exact("identity-no-cubic", 0, len(split.cubic))]

    def each():
        g = inv.degree3_generators()
        kp = inv._kp
        want = {
            "pf3": (kp(3, (40, -12, 1), (0, 0, 48)), kp(1, (-8, 1), (0, 4)),
                    {g[4]: Fraction(-1, 432), g[3]: Fraction(-5, 432)}),
            "psi0_3": (kp(3, (40, 12, 1), (0, 0, 6)), kp(1, (48, 6), (0, 1)),
                       {g[4]: Fraction(-1, 6), g[3]: Fraction(-1, 6)}),
            "theta3": (kp(3, (), (1,)), kp(1, (2,), (0, 1)),
                       {g[4]: Fraction(1, 72), g[3]: Fraction(-1, 18)}),
        }
        cases = []
        for name, split in inv.per_poly_einstein_expansions().items():
            s, r, cub = want[name]
            cases.append(exact(f"{name}-scalar", str(s), str(split.scalar)))
            cases.append(exact(f"{name}-norm", str(r), str(split.norm)))
            got = {h: c for h, c in split.cubic.items()}
            want_c = {h: inv.KappaPoly.monomial(RatFuncM(c), 0) for h, c in cub.items()}
            cases.append(exact(f"{name}-cubic",
                               sorted((str(h), str(c)) for h, c in want_c.items()),
                               sorted((str(h), str(c)) for h, c in got.items())))
        return cases

    return [combo, each]


def _hitchin_thorpe(opts) -> List[Thunk]:
    def run():
        worst = 0.0
        for seed in range(20):
            rep = inv.hitchin_thorpe4(random_model(4, 3, 800 + seed))
            worst = max(worst, rep["relative_gap"])
        c = inv.hitchin_thorpe4(constant_model(4, 1.0))
        return [Case("random-models", "gap <= 1e-9", worst, 1e-9, worst <= 1e-9, worst),
                close("constant-m4", -12.0, c["lhs"], 1e-9)]
    return [run]


def _class_values(R, max_n=3):
    sec = phi_plus(R).comp
    return {g: inv.eval_graph(g, R, _sec_comp=sec) for n in range(1, max_n + 1) for g in enumerate_degree(n)}


def _ihx_numeric(opts) -> List[Thunk]:
    count = int(opts.get("models", 50))
    rels = [r for n in (1, 2, 3) for r in ihx_relations(n)]

    def run():
        worst = 0.0
        for k in range(count):
            R = random_model(4 + k % 3, 3, 900 + k)
            vals = _class_values(R)
            for r in rels:
                terms = [float(c) * vals[g] for g, c in r.items()]
                scale = max(abs(t) for t in terms)
                worst = max(worst, abs(sum(terms)) / scale if scale else 0.0)
        return [Case(f"relations-vanish-{count}-models", "gap <= 1e-9", worst, 1e-9, worst <= 1e-9, worst)]
    return [run]


def _stability(opts) -> List[Thunk]:
    def padding():
        worst = 0.0
        R = random_model(4, 3, 11)
        base = _class_values(R)
        for k in (1, 2, 3):
            padded = _class_values(pad(R, k))
            worst = max(worst, max(rel_gap(base[g], padded[g]) for g in base))
        return [Case("padding", "gap <= 1e-10", worst, 1e-10, worst <= 1e-10, worst)]

    def orthogonal():
        worst = 0.0
        rng = np.random.default_rng(12)
        for m in (4, 5):
            R = random_model(m, 3, 12 + m)
            F = random_orthogonal(m, rng)
            RF = rotate(R, F)
            a, b = _class_values(R, 2), _class_values(RF, 2)
            worst = max(worst, max(rel_gap(a[g], b[g]) for g in a))
        return [Case("orthogonal-invariance", "gap <= 1e-8", worst, 1e-8, worst <= 1e-8, worst)]

    def additivity():
        worst = 0.0
        R1, R2 = random_model(3, 3, 21), random_model(4, 3, 22)
        S = direct_sum(R1, R2)
        a, b, s = _class_values(R1), _class_values(R2), _class_values(S)
        for g in s:
            if len(connected_components(g)) == 1:
                worst = max(worst, rel_gap(a[g] + b[g], s[g], max(abs(a[g]), abs(b[g]), abs(s[g]))))
        return [Case("connected-additivity", "gap <= 1e-9", worst, 1e-9, worst <= 1e-9, worst)]

    def multiplicativity():
        worst = 0.0
        R = random_model(5, 3, 31)
        vals = _class_values(R, 2)
        small = [g for g in vals if g.n <= 2]
        for g in small:
            for h in small:
                if g.n + h.n > 3:
                    continue
                u = disjoint_union(g, h)
                worst = max(worst, rel_gap(vals[g] * vals[h], inv.eval_graph(u, R)))
        pf = {i: inv.pfaffian_poly(i) for i in range(3)}
        R1, R2 = random_model(3, 3, 32), random_model(4, 3, 33)
        S = direct_sum(R1, R2)
        lhs = inv.eval_poly(pf[2], S)
        rhs = sum(inv.eval_poly(pf[i], R1) * inv.eval_poly(pf[2 - i], R2) for i in range(3))
        return [Case("disjoint-union", "gap <= 1e-10", worst, 1e-10, worst <= 1e-10, worst),
                close("pfaffian-direct-sum", rhs, lhs, 1e-9)]

    def strategies():
        worst = 0.0
        for m in (3, 4):
            R = random_model(m, 3, 40 + m)
            sec = phi_plus(R).comp
            for n in (1, 2, 3):
                for g in enumerate_degree(n):
                    a = inv.eval_graph(g, R, "naive", sec)
                    b = inv.eval_graph(g, R, "scheduled", sec)
                    worst = max(worst, rel_gap(a, b))
        return [Case("strategy-equivalence", "gap <= 1e-10", worst, 1e-10, worst <= 1e-10, worst)]

    return [padding, orthogonal, additivity, multiplicativity, strategies]


SUITES: Dict[str, Callable[[dict], List[Thunk]]] = {
    "ihx-numeric": _ihx_numeric,
    "dims": _dims,
    "gauss-bonnet": _gauss_bonnet,
    "norm12": _norm12,
    "delta-table": _delta_table,
    "const-values": _const_values,
    "pfaffian-defn": _pfaffian_defn,
    "psi-closure": _psi_closure,
    "moments-mc": _moments_mc,
    "cubic-lemma": _cubic_lemma,
    "einstein-cubic": _einstein_cubic,
    "einstein-symbolic": _einstein_symbolic,
    "hitchin-thorpe4": _hitchin_thorpe,
    "stability": _stability,
}


def _guard(thunk: Thunk) -> List[Case]:
    try:
        return thunk()
    except Exception as exc:  # a crashing check is a failing check
        return [Case(getattr(thunk, "__name__", "case"), "no error", f"{type(exc).__name__}: {exc}", None, False)]


def run_suite(name: str, opts: Optional[dict] = None, workers: int = 2) -> SuiteReport:
    if name not in SUITES:
        raise UnknownSuite(name)
    opts = opts or {}
    t = time.time()
    thunks = SUITES[name](opts)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_guard, thunks))
    cases = sorted((c for r in results for c in r), key=lambda c: c.name)
    tol = opts.get("tolerance")
    if tol is not None:
        for c in cases:
            if c.gap is not None:
                c.tolerance, c.passed = tol, c.gap <= tol
    return SuiteReport(name, cases, time.time() - t)
