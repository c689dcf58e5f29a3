"""Graphs as curvature invariants.

A graph is evaluated on a curvature tensor by putting the sectional
curvature tensor on every red edge (the two black flags of one endpoint
fill the first pair of slots) and summing over an orthonormal basis along
every black edge.  On top of that live the curvature derivation, the
constant-curvature values, the Pfaffian and moment polynomials with their
definitional oracles, the cubic invariant built from the standard curvature
term and the reduction of cubic polynomials on Einstein tensors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import ExtPoly, GraphPoly, gp_mul, grade, to_ring
from .contract import EvalPlan, naive_contract, plan_contraction, run_plan
from .curvature import (
    CurvModel, CurvatureError, constant_model, is_einstein, norm_sq, phi_plus,
    ricci, scalar, sym_norm_sq, theta3_numeric, traceless_ricci,
)
from .exactalg import KappaPoly, PolyM, RatFuncM
from .graphs import (
    EMPTY, ColoredGraph, ExtGraph, FlagGraph, automorphisms, build_graph,
    cycle_stats, enumerate_degree,
)
from .ihx import build_quotient, reduce_poly

__all__ = [
    "THETA", "THETA_SQ", "DUMBBELL", "SQ_PAR", "SQ_CROSS", "SEC_NORM",
    "graph_network", "make_plan", "eval_graph", "eval_poly", "eval_ext",
    "delta_m", "delta_graph", "const_value_symbolic", "const_value",
    "pfaffian_poly", "pfaffian_defn_eval", "moment_poly", "psi_defn_eval",
    "moment_value", "falling", "degree3_generators", "theta3_poly",
    "reducible_edges", "einstein_step", "einstein_reduce", "EinsteinSplit",
    "split_einstein", "einstein_combination", "einstein_identity",
    "per_poly_einstein_expansions", "gauss_bonnet_sphere", "hitchin_thorpe4",
    "double_r_square", "SymbolicMismatch",
]

THETA = build_graph([[0, 1]], [[0, 1]])
DUMBBELL = build_graph([[0], [1]], [[0, 1]])
SQ_PAR = build_graph([[0, 1, 2, 3]], [[0, 1], [2, 3]])
SQ_CROSS = build_graph([[0, 1, 2, 3]], [[0, 2], [1, 3]])
# two black double edges joined by two red edges: evaluates to 4 |Sec|^2
SEC_NORM = build_graph([[0, 1], [2, 3]], [[0, 2], [1, 3]])
THETA_SQ = build_graph([[0, 1], [2, 3]], [[0, 1], [2, 3]])


class SymbolicMismatch(AssertionError):
    pass


# ---------------------------------------------------------------------------
# evaluation

def graph_network(g: ColoredGraph) -> List[Tuple[int, ...]]:
    """One operand per red edge: edge labels of (v+ flags, v- flags)."""
    fg = FlagGraph.from_graph(g)
    edge_of: Dict[int, int] = {}
    k = 0
    for f in sorted(fg.black):
        if f not in edge_of:
            edge_of[f] = edge_of[fg.black[f]] = k
            k += 1
    ops = []
    for u, v in g.red_pairs():
        a0, a1 = fg.vflags[u]
        b0, b1 = fg.vflags[v]
        ops.append((edge_of[a0], edge_of[a1], edge_of[b0], edge_of[b1]))
    return ops


@lru_cache(maxsize=4096)
def _plan(g: ColoredGraph, m: int) -> EvalPlan:
    plan = plan_contraction(graph_network(g), m)
    plan.graph = g
    return plan


def make_plan(g: ColoredGraph, m: int) -> EvalPlan:
    return _plan(g, m)


def _sec(model: CurvModel) -> np.ndarray:
    if model.kind == "Sec":
        return model.comp
    return phi_plus(model).comp


def eval_graph(g: ColoredGraph, model: CurvModel, strategy: str = "scheduled",
               _sec_comp: Optional[np.ndarray] = None) -> float:
    sec = _sec(model) if _sec_comp is None else _sec_comp
    if g.n == 0:
        return 1.0
    if strategy == "naive":
        ops = graph_network(g)
        return naive_contract(ops, [sec] * len(ops), model.m)
    if strategy != "scheduled":
        raise ValueError(f"unknown strategy {strategy!r}")
    plan = _plan(g, model.m)
    return run_plan(plan, [sec] * len(plan.operands))


def _numeric(c) -> float:
    if isinstance(c, (int, Fraction)):
        return float(c)
    raise TypeError("symbolic coefficients: substitute m before evaluating")


def eval_poly(p: GraphPoly, model: CurvModel, strategy: str = "scheduled") -> float:
    if p.ring != "rat":
        raise TypeError("symbolic coefficients: substitute m before evaluating")
    sec = _sec(model)
    return float(sum(_numeric(c) * eval_graph(g, model, strategy, sec) for g, c in p.items()))


def eval_ext(e: ExtPoly, model: CurvModel) -> float:
    """Sec on red edges, R on tetravalent vertices (slots in decoration order)."""
    if model.kind != "R":
        raise CurvatureError("eval_ext needs an algebraic curvature tensor")
    sec = _sec(model)
    total = 0.0
    for ext, c in e.terms.items():
        bm = ext.black_map()
        edge_of: Dict[int, int] = {}
        k = 0
        for f in sorted(bm):
            if f not in edge_of:
                edge_of[f] = edge_of[bm[f]] = k
                k += 1
        ops, tens = [], []
        for a, b in ext.red:
            ops.append(tuple(edge_of[f] for f in ext.tri[a] + ext.tri[b]))
            tens.append(sec)
        for q in ext.tetra:
            ops.append(tuple(edge_of[f] for f in q))
            tens.append(model.comp)
        plan = plan_contraction(ops, model.m)
        total += float(c) * run_plan(plan, tens)
    return total


def double_r_square() -> ExtPoly:
    """1/4 R(X,Y;U,V) R(X,Y;U,V): two tetravalent vertices, four black edges."""
    e = ExtGraph((), (), ((0, 1, 2, 3), (4, 5, 6, 7)), ((0, 4), (1, 5), (2, 6), (3, 7)))
    return ExtPoly({e: Fraction(1, 4)})


# ---------------------------------------------------------------------------
# curvature derivation

@lru_cache(maxsize=None)
def delta_graph(g: ColoredGraph) -> Tuple[Tuple[ColoredGraph, PolyM], ...]:
    """delta_m of a single graph as (graph, coefficient) pairs."""
    acc: Dict[ColoredGraph, PolyM] = {}
    fg = FlagGraph.from_graph(g)
    m = PolyM.m()
    for u, v in g.red_pairs():
        a0, a1 = fg.vflags[u]
        b0, b1 = fg.vflags[v]
        for weight, joins in ((4, [(a0, a1), (b0, b1)]),
                              (-2, [(a0, b0), (a1, b1)]),
                              (-2, [(a0, b1), (a1, b0)])):
            h, circles = fg.splice([u, v], joins)
            gh = h.to_graph()
            c = PolyM((weight,)) * m ** circles
            acc[gh] = acc[gh] + c if gh in acc else c
    return tuple((h, c) for h, c in acc.items() if not c.is_zero())


def delta_m(p: GraphPoly) -> GraphPoly:
    """The curvature derivation in formal dimension m (coefficients PolyM)."""
    if p.ring == "rat":
        p = p.lift("polym")
    if p.ring not in ("polym", "ratfunc", "kappa"):
        raise TypeError(f"delta_m does not apply to ring {p.ring}")
    acc: Dict[ColoredGraph, object] = {}
    for g, c in p.items():
        for h, w in delta_graph(g):
            x = c * to_ring(w, p.ring)
            acc[h] = acc[h] + x if h in acc else x
    return GraphPoly(acc, p.ring)


def const_value_symbolic(p: GraphPoly) -> Dict[int, RatFuncM]:
    """Per degree n, the rational function c_n(m) with value c_n(m) kappa^n
    on space forms of dimension m and scalar curvature kappa."""
    out: Dict[int, RatFuncM] = {}
    m = PolyM.m()
    for n in p.degrees():
        q = grade(p, n).lift("polym") if p.ring == "rat" else grade(p, n)
        for _ in range(n):
            q = delta_m(q)
        top = q.coeff(EMPTY)
        out[n] = RatFuncM(top) / (RatFuncM(m * (m - 1)) ** n * math.factorial(n))
    return out


def const_value(p: GraphPoly, m: int, kappa: float) -> float:
    if m * (m - 1) == 0:
        raise ValueError("m(m-1) must be non-zero")
    total = 0.0
    for n, c in const_value_symbolic(p).items():
        total += float(c(m)) * kappa ** n
    return total


# ---------------------------------------------------------------------------
# Pfaffian and moment polynomials

def pfaffian_poly(n: int) -> GraphPoly:
    terms = {}
    for g in enumerate_degree(n):
        st = cycle_stats(g)
        bar = automorphisms(g).autBar
        terms[g] = Fraction((-1) ** st.e * 2 ** st.g, 6 ** n * bar)
    return GraphPoly(terms)


def moment_poly(n: int) -> GraphPoly:
    terms = {}
    for g in enumerate_degree(n):
        if any(len(c) % 2 for c in g.cycles):
            continue
        st = cycle_stats(g)
        terms[g] = Fraction((-1) ** n * 2 ** st.g, automorphisms(g).autBar)
    return GraphPoly(terms)


def _perm_sign(p: Sequence[int]) -> int:
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, k = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            k += 1
        if k % 2 == 0:
            sign = -sign
    return sign


def pfaffian_defn_eval(n: int, model: CurvModel) -> float:
    """Direct sum over permutations of the 2n sectional-curvature slots."""
    if n > 3:
        raise ValueError("the permutation sum is only offered for n <= 3")
    if n == 0:
        return 1.0
    sec = _sec(model)
    L = "abcdef"
    total = 0.0
    for sigma in itertools.permutations(range(2 * n)):
        ops = []
        for r in range(n):
            i, j = 2 * r, 2 * r + 1
            ops.append(L[i] + L[sigma[i]] + L[j] + L[sigma[j]])
        total += _perm_sign(sigma) * float(np.einsum(",".join(ops) + "->", *([sec] * n),
                                                     optimize="greedy"))
    return total / (12 ** n * math.factorial(n))


def _trace_power_tensor(R: np.ndarray, r: int) -> np.ndarray:
    """Coefficient tensor T[a1,b1,..,ar,br] of tr(J_X^r), J_X[k,u] = R(u,X;X,k)."""
    m = R.shape[0]
    L = "abcdefghijklmnopqrstuvwxyz"
    ins = L[:r]           # i_1..i_r
    xs = L[r:3 * r]       # a_s, b_s
    ops = []
    for s in range(r):
        ops.append(ins[(s + 1) % r] + xs[2 * s] + xs[2 * s + 1] + ins[s])
    return np.einsum(",".join(ops) + "->" + xs, *([R] * r), optimize="greedy")


def _pairings(items: List[int]):
    if not items:
        yield []
        return
    a = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for p in _pairings(rest):
            yield [(a, items[i])] + p


def _int_partitions(n: int, largest: Optional[int] = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _int_partitions(n - k, k):
            yield (k,) + rest


def psi_defn_eval(n: int, model: CurvModel) -> float:
    """Wick-closure evaluation of the normalized moment polynomial.

    Take the degree-2n part of exp(sum_r tr(J_X^r)/(2r)) as a polynomial in
    X, sum over all pairings of its 2n X-slots (the Gaussian expectation of
    X), and multiply by 2^n.
    """
    if n > 3:
        raise ValueError("the closure oracle is only offered for n <= 3")
    if n == 0:
        return 1.0
    R = model.comp
    cache = {}
    total = 0.0
    for lam in _int_partitions(n):
        mult: Dict[int, int] = {}
        for r in lam:
            mult[r] = mult.get(r, 0) + 1
        weight = 1.0
        for r, k in mult.items():
            weight /= (2 * r) ** k * math.factorial(k)
        tens = []
        for r in lam:
            if r not in cache:
                cache[r] = _trace_power_tensor(R, r)
            tens.append(cache[r])
        L = "abcdefghijklmnopqrstuvwxyz"
        closed = 0.0
        for pairing in _pairings(list(range(2 * n))):
            letter = {}
            for k, (x, y) in enumerate(pairing):
                letter[x] = letter[y] = L[k]
            ops, pos = [], 0
            for r in lam:
                ops.append("".join(letter[pos + t] for t in range(2 * r)))
                pos += 2 * r
            closed += float(np.einsum(",".join(ops) + "->", *tens, optimize="greedy"))
        total += weight * closed
    return 2 ** n * total


def falling(x: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= x - i
    return out


def moment_value(n: int, model: CurvModel) -> float:
    """n-th moment of the sectional curvature over the Grassmannian of planes."""
    ff = falling(model.m + 2 * n - 2, 2 * n)
    if ff == 0:
        raise ValueError("falling factorial vanishes")
    return math.factorial(n) / ff * eval_poly(moment_poly(n), model)


# ---------------------------------------------------------------------------
# degree-3 generators and the cubic invariant

def _fingerprint_rows() -> List[Dict[ColoredGraph, PolyM]]:
    m = PolyM.m()
    return [
        {SQ_PAR: -6 * (m - 1)},
        {SQ_PAR: -(4 * m - 6), THETA_SQ: PolyM((-2,))},
        {SQ_PAR: PolyM((12,)), SQ_CROSS: -2 * (m - 1)},
        {SQ_PAR: PolyM((12,)), SQ_CROSS: PolyM((6,))},
        {SQ_PAR: PolyM((-6,)), SQ_CROSS: PolyM((24,))},
    ]


@lru_cache(maxsize=None)
def degree3_generators() -> Tuple[ColoredGraph, ...]:
    """The five hexagon classes ordered by their curvature-derivation rows."""
    q2 = build_quotient(2)
    found: List[Optional[ColoredGraph]] = [None] * 5
    rows = _fingerprint_rows()
    for g in enumerate_degree(3, True):
        image = q2.normal_form(delta_m(GraphPoly.of(g)))
        for k, row in enumerate(rows):
            if image == GraphPoly(row, "polym"):
                if found[k] is not None:
                    raise SymbolicMismatch(f"two classes share fingerprint row {k + 1}")
                found[k] = g
    if any(f is None for f in found):
        raise SymbolicMismatch("fingerprint lookup failed for some degree-3 row")
    return tuple(found)


def theta3_poly() -> GraphPoly:
    """<q(R)*R, R> = 1/12 (1/6 g5 - 2/3 g4 + 1/2 g3) in the row order above."""
    g = degree3_generators()
    return GraphPoly({
        g[4]: Fraction(1, 72),
        g[3]: Fraction(-2, 36),
        g[2]: Fraction(1, 24),
    })


# ---------------------------------------------------------------------------
# Einstein reduction

def _black_adjacent(g: ColoredGraph, u: int, v: int) -> bool:
    for c in g.cycles:
        L = len(c)
        if L < 2 or u not in c:
            continue
        i = c.index(u)
        return c[(i + 1) % L] == v or c[(i - 1) % L] == v
    return False


def reducible_edges(g: ColoredGraph) -> List[Tuple[int, int]]:
    """Red edges whose endpoints are also joined by a black edge."""
    return [(u, v) for u, v in g.red_pairs() if _black_adjacent(g, u, v)]


def einstein_step(g: ColoredGraph, edge: Tuple[int, int]) -> Tuple[ColoredGraph, KappaPoly]:
    """Contract one such red edge: on Einstein tensors the pair of vertices
    evaluates to -2 kappa/m times a plain black strand."""
    u, v = edge
    fg = FlagGraph.from_graph(g)
    shared = None
    for a in fg.vflags[u]:
        if fg.black[a] in fg.vflags[v]:
            shared = (a, fg.black[a])
            break
    if shared is None:
        raise ValueError(f"red edge {edge} has no parallel black edge")
    a, b = shared
    c = [f for f in fg.vflags[u] if f != a][0]
    d = [f for f in fg.vflags[v] if f != b][0]
    h, circles = fg.splice([u, v], [(a, b), (c, d)])
    # the consumed black edge always closes into one circle; it is not a trace
    m = RatFuncM.m()
    factor = RatFuncM(-2) / m * m ** (circles - 1)
    return h.to_graph(), KappaPoly.monomial(factor, 1)


def einstein_reduce(p: GraphPoly, chooser: Optional[Callable] = None) -> GraphPoly:
    """Rewrite ``p`` (degree <= 3) on Einstein tensors.

    The result has KappaPoly coefficients on the empty graph, on the crossed
    square and on irreducible degree-3 classes.  ``chooser`` picks which
    qualifying red edge to contract (default: the smallest).
    """
    if any(n > 3 for n in p.degrees()):
        raise NotImplementedError("Einstein reduction is only supported up to degree 3")
    if p.ring != "kappa":
        p = p.lift("kappa")
    work = reduce_poly(p)
    while True:
        acc: Dict[ColoredGraph, KappaPoly] = {}
        changed = False
        for g, c in work.items():
            edges = reducible_edges(g)
            if edges:
                e = chooser(g, edges) if chooser else edges[0]
                h, f = einstein_step(g, e)
                x = c * f
                changed = True
            else:
                h, x = g, c
            acc[h] = acc[h] + x if h in acc else x
        work = reduce_poly(GraphPoly(acc, "kappa"))
        if not changed:
            return work


@dataclass
class EinsteinSplit:
    scalar: KappaPoly           # coefficient of the empty graph
    norm: KappaPoly             # coefficient of |R|^2 (crossed square = -24 |R|^2)
    cubic: Dict[ColoredGraph, KappaPoly]


def split_einstein(r: GraphPoly) -> EinsteinSplit:
    cubic = {}
    scalar_part, norm = KappaPoly(), KappaPoly()
    for g, c in r.items():
        if g == EMPTY:
            scalar_part = c
        elif g == SQ_CROSS:
            norm = c * (-24)
        else:
            cubic[g] = c
    return EinsteinSplit(scalar_part, norm, cubic)


def einstein_combination() -> GraphPoly:
    """pf_3 - 1/40 psi0_3 - 2/15 theta_3."""
    return (pfaffian_poly(3) + moment_poly(3) * Fraction(-1, 40)
            + theta3_poly() * Fraction(-2, 15))


def _kp(power: int, num: Sequence[int], den: Sequence[int]) -> KappaPoly:
    return KappaPoly.monomial(RatFuncM(PolyM(num), PolyM(den)), power)


def expected_identity_rhs() -> Tuple[KappaPoly, KappaPoly]:
    """kappa^3 (m^2-18m+40)/(60 m^2) and kappa (3m-104)/(30m)."""
    return (_kp(3, (40, -18, 1), (0, 0, 60)), _kp(1, (-104, 3), (0, 30)))


def einstein_identity(model: CurvModel, tol: float = 1e-9) -> dict:
    if model.m < 3:
        raise CurvatureError("dimension must be at least 3")
    if not is_einstein(model):
        raise CurvatureError("model is not of Einstein type")
    m = model.m
    kappa = scalar(model)
    pf3 = eval_poly(pfaffian_poly(3), model)
    psi3 = eval_poly(moment_poly(3), model)
    th3 = theta3_numeric(model)
    lhs = pf3 - psi3 / 40 - 2 * th3 / 15
    rhs = kappa ** 3 * (m * m - 18 * m + 40) / (60 * m * m) + kappa * (3 * m - 104) / (30 * m) * norm_sq(model)
    scale = max(abs(lhs), abs(rhs), abs(pf3), abs(psi3) / 40, abs(2 * th3 / 15), 1e-300)
    gap = abs(lhs - rhs) / scale
    split = split_einstein(einstein_reduce(einstein_combination()))
    want_scalar, want_norm = expected_identity_rhs()
    symbolic_ok = split.scalar == want_scalar and split.norm == want_norm and not split.cubic
    return {
        "m": m, "kappa": kappa, "lhs": lhs, "rhs": rhs, "relative_gap": gap,
        "numeric_pass": gap <= tol, "symbolic_pass": symbolic_ok,
        "scalar_coeff": str(split.scalar), "norm_coeff": str(split.norm),
    }


def per_poly_einstein_expansions() -> Dict[str, EinsteinSplit]:
    return {
        "pf3": split_einstein(einstein_reduce(pfaffian_poly(3))),
        "psi0_3": split_einstein(einstein_reduce(moment_poly(3))),
        "theta3": split_einstein(einstein_reduce(theta3_poly())),
    }


# ---------------------------------------------------------------------------
# global checks

_SPHERE_VOLUME = {2: 4 * math.pi, 4: 8 * math.pi ** 2 / 3, 6: 16 * math.pi ** 3 / 15}


def gauss_bonnet_sphere(m: int) -> float:
    """Euler characteristic of the unit sphere from the Pfaffian polynomial."""
    if m % 2:
        raise ValueError("Gauss-Bonnet needs even dimension")
    if m not in _SPHERE_VOLUME:
        raise ValueError("only m = 2, 4, 6 are tabulated")
    pf = const_value(pfaffian_poly(m // 2), m, m * (m - 1))
    return _SPHERE_VOLUME[m] * pf / (2 * math.pi) ** (m // 2)


def hitchin_thorpe4(model: CurvModel, tol: float = 1e-9) -> dict:
    """pf_2 - 15 psi_2 = -4/3 |Ric0|^2 - kappa^2/12 in dimension four."""
    if model.m != 4:
        raise CurvatureError("the integrand identity is stated for m = 4")
    lhs = eval_poly(pfaffian_poly(2), model) - 15 * moment_value(2, model)
    kappa = scalar(model)
    rhs = -4.0 / 3.0 * sym_norm_sq(traceless_ricci(model)) - kappa ** 2 / 12
    scale = max(abs(lhs), abs(rhs), 1e-300)
    gap = abs(lhs - rhs) / scale if scale > 1e-300 else 0.0
    return {"lhs": lhs, "rhs": rhs, "relative_gap": gap, "pass": gap <= tol}
