"""Graph polynomials: sparse linear combinations of canonical graphs.

The product is disjoint union.  Coefficients live in one of the exact rings
of :mod:`curvgraph.exactalg`; the ring is recorded on each polynomial and
mixing rings is an error unless one side is explicitly lifted.
"""

from __future__ import annotations

import json
import math
import re
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .exactalg import KappaPoly, PolyM, RatFuncM, rat
from .graphs import (
    EMPTY, ColoredGraph, ExtGraph, FlagGraph, GraphError, build_ext_graph,
    canonical_form, disjoint_union, format_graph, parse_graph,
)

__all__ = [
    "RINGS", "RingMismatch", "GraphPoly", "gp_add", "gp_scale", "gp_mul", "grade",
    "exp_trunc", "log_trunc", "generator_counts", "NotFreeError", "ExtPoly",
    "expand_tetravalent", "parse_poly", "format_poly", "poly_to_json",
    "poly_from_json", "parse_coeff",
]

RINGS = ("rat", "polym", "ratfunc", "kappa")
_ORDER = {r: i for i, r in enumerate(RINGS)}


class RingMismatch(TypeError):
    pass


def to_ring(x, ring: str):
    """Lift a scalar into ``ring`` (only upwards: rat < polym < ratfunc < kappa)."""
    if ring == "rat":
        if isinstance(x, (int, Fraction)):
            return rat(x)
        if isinstance(x, str):
            return rat(x)
        raise RingMismatch(f"{x!r} is not rational")
    if ring == "polym":
        if isinstance(x, (int, Fraction, str)):
            return PolyM((rat(x),))
        if isinstance(x, PolyM):
            return x
        raise RingMismatch(f"{x!r} is not a polynomial in m")
    if ring == "ratfunc":
        if isinstance(x, str):
            x = rat(x)
        if isinstance(x, (int, Fraction, PolyM)):
            return RatFuncM(x)
        if isinstance(x, RatFuncM):
            return x
        raise RingMismatch(f"{x!r} is not a rational function of m")
    if ring == "kappa":
        if isinstance(x, str):
            x = rat(x)
        if isinstance(x, (int, Fraction, PolyM, RatFuncM, KappaPoly)):
            return KappaPoly._lift(x)
        raise RingMismatch(f"{x!r} cannot be lifted to kappa polynomials")
    raise ValueError(f"unknown ring {ring!r}")


def _is_zero(c) -> bool:
    if isinstance(c, (int, Fraction)):
        return c == 0
    return c.is_zero()


def _sort_terms(terms):
    return sorted(terms, key=lambda kv: canonical_form(kv[0]))


class GraphPoly:
    """Immutable map canonical graph -> coefficient."""

    __slots__ = ("_terms", "ring", "max_degree")

    def __init__(self, terms: Optional[Mapping[ColoredGraph, object]] = None,
                 ring: str = "rat", max_degree: Optional[int] = None):
        if ring not in RINGS:
            raise ValueError(f"unknown ring {ring!r}")
        out: Dict[ColoredGraph, object] = {}
        for g, c in (terms or {}).items():
            if not g.canonical:
                raise GraphError("GraphPoly keys must be canonical graphs")
            if max_degree is not None and g.n > max_degree:
                continue
            c = to_ring(c, ring)
            if not _is_zero(c):
                out[g] = c
        self._terms = out
        self.ring = ring
        self.max_degree = max_degree

    # construction helpers
    @classmethod
    def one(cls, ring: str = "rat") -> "GraphPoly":
        return cls({EMPTY: 1}, ring)

    @classmethod
    def zero(cls, ring: str = "rat") -> "GraphPoly":
        return cls({}, ring)

    @classmethod
    def of(cls, g: ColoredGraph, coeff=1, ring: str = "rat") -> "GraphPoly":
        return cls({g: coeff}, ring)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[ColoredGraph, object]], ring: str = "rat"):
        acc: Dict[ColoredGraph, object] = {}
        for g, c in pairs:
            c = to_ring(c, ring)
            acc[g] = acc[g] + c if g in acc else c
        return cls(acc, ring)

    # views
    @property
    def terms(self) -> Dict[ColoredGraph, object]:
        return dict(self._terms)

    def items(self) -> List[Tuple[ColoredGraph, object]]:
        return _sort_terms(self._terms.items())

    def coeff(self, g: ColoredGraph):
        return self._terms.get(g, to_ring(0, self.ring))

    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator[ColoredGraph]:
        return iter(g for g, _ in self.items())

    def is_zero(self) -> bool:
        return not self._terms

    def degrees(self) -> List[int]:
        return sorted({g.n for g in self._terms})

    def lift(self, ring: str) -> "GraphPoly":
        if _ORDER[ring] < _ORDER[self.ring]:
            raise RingMismatch(f"cannot lower {self.ring} to {ring}")
        return GraphPoly(self._terms, ring, self.max_degree)

    def map_coeffs(self, fn: Callable, ring: Optional[str] = None) -> "GraphPoly":
        return GraphPoly({g: fn(c) for g, c in self._terms.items()}, ring or self.ring,
                         self.max_degree)

    # arithmetic
    def __add__(self, other):
        return gp_add(self, other)

    def __sub__(self, other):
        return gp_add(self, gp_scale(other, -1))

    def __neg__(self):
        return gp_scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, GraphPoly):
            return gp_mul(self, other)
        return gp_scale(self, other)

    def __rmul__(self, other):
        return gp_scale(self, other)

    def __pow__(self, k: int):
        out = GraphPoly.one(self.ring)
        for _ in range(k):
            out = gp_mul(out, self)
        return out

    def __eq__(self, other):
        if not isinstance(other, GraphPoly):
            return NotImplemented
        if self.ring != other.ring:
            hi = max(self.ring, other.ring, key=_ORDER.get)
            return self.lift(hi)._terms == other.lift(hi)._terms
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        return f"GraphPoly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def _check_rings(p: GraphPoly, q: GraphPoly):
    if p.ring != q.ring:
        raise RingMismatch(f"ring mismatch: {p.ring} vs {q.ring}")


def _min_deg(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def gp_add(p: GraphPoly, q: GraphPoly) -> GraphPoly:
    _check_rings(p, q)
    acc = dict(p._terms)
    for g, c in q._terms.items():
        acc[g] = acc[g] + c if g in acc else c
    return GraphPoly(acc, p.ring, _min_deg(p.max_degree, q.max_degree))


def gp_scale(p: GraphPoly, c) -> GraphPoly:
    c = to_ring(c, p.ring) if not isinstance(c, (int, Fraction)) else c
    return GraphPoly({g: x * c for g, x in p._terms.items()}, p.ring, p.max_degree)


def gp_mul(p: GraphPoly, q: GraphPoly, max_degree: Optional[int] = None) -> GraphPoly:
    """Bilinear extension of disjoint union, truncated above ``max_degree``."""
    _check_rings(p, q)
    cap = _min_deg(_min_deg(p.max_degree, q.max_degree), max_degree)
    acc: Dict[ColoredGraph, object] = {}
    for g, a in p._terms.items():
        for h, b in q._terms.items():
            if cap is not None and g.n + h.n > cap:
                continue
            u = _union(g, h)
            c = a * b
            acc[u] = acc[u] + c if u in acc else c
    return GraphPoly(acc, p.ring, cap)


_UNION_CACHE: Dict[Tuple[ColoredGraph, ColoredGraph], ColoredGraph] = {}


def _union(g: ColoredGraph, h: ColoredGraph) -> ColoredGraph:
    if g.n == 0:
        return h
    if h.n == 0:
        return g
    key = (g, h) if canonical_form(g) <= canonical_form(h) else (h, g)
    u = _UNION_CACHE.get(key)
    if u is None:
        u = disjoint_union(*key)
        _UNION_CACHE[key] = u
    return u


def grade(p: GraphPoly, n: int) -> GraphPoly:
    return GraphPoly({g: c for g, c in p._terms.items() if g.n == n}, p.ring, p.max_degree)


def _constant(p: GraphPoly):
    return p._terms.get(EMPTY, to_ring(0, p.ring))


def exp_trunc(p: GraphPoly, D: int) -> GraphPoly:
    """exp(p) up to degree ``D``; ``p`` must have no constant term."""
    if not _is_zero(_constant(p)):
        raise ValueError("exp_trunc needs a series without constant term")
    out = GraphPoly.one(p.ring)
    power = GraphPoly.one(p.ring)
    for k in range(1, D + 1):
        power = gp_scale(gp_mul(power, p, D), Fraction(1, k))
        if power.is_zero():
            break
        out = out + power
    return GraphPoly(out._terms, p.ring, D)


def log_trunc(p: GraphPoly, D: int) -> GraphPoly:
    """log(p) up to degree ``D``; ``p`` must have constant term 1."""
    if _constant(p) != to_ring(1, p.ring):
        raise ValueError("log_trunc needs a series with constant term 1")
    q = p - GraphPoly.one(p.ring)
    q = GraphPoly(q._terms, p.ring, D)
    out = GraphPoly.zero(p.ring)
    power = GraphPoly.one(p.ring)
    for k in range(1, D + 1):
        power = gp_mul(power, q, D)
        if power.is_zero():
            break
        out = out + gp_scale(power, Fraction((-1) ** (k + 1), k))
    return GraphPoly(out._terms, p.ring, D)


class NotFreeError(ValueError):
    """The series is not the Hilbert series of a free commutative algebra."""


def generator_counts(dims: Sequence[int]) -> List[int]:
    """Numbers of generators per degree of a free commutative graded algebra.

    Solves ``sum_{d|n} d*m_d = [t^n] t d/dt log(sum dims[n] t^n)`` for
    ``n = 1 .. len(dims)-1``.
    """
    d = [Fraction(x) for x in dims]
    if not d or d[0] != 1:
        raise NotFreeError("dims[0] must be 1")
    N = len(d) - 1
    c = [Fraction(0)] * (N + 1)
    for n in range(1, N + 1):
        c[n] = n * d[n] - sum(c[k] * d[n - k] for k in range(1, n))
    gens: List[int] = [0] * (N + 1)
    for n in range(1, N + 1):
        rest = c[n] - sum(k * gens[k] for k in range(1, n) if n % k == 0)
        mn = rest / n
        if mn.denominator != 1 or mn < 0:
            raise NotFreeError(f"degree {n} would need {mn} generators")
        gens[n] = int(mn)
    return gens[1:]


# ---------------------------------------------------------------------------
# extended polynomials

class ExtPoly:
    """Linear combination of extended graphs with orientation signs folded in."""

    def __init__(self, terms: Optional[Mapping[ExtGraph, object]] = None):
        acc: Dict[Tuple, object] = {}
        graphs: Dict[Tuple, ExtGraph] = {}
        for e, c in (terms or {}).items():
            c = rat(c) * e.sign
            k = e.key()
            graphs[k] = ExtGraph(e.tri, e.red, e.tetra, e.black, 1)
            acc[k] = acc.get(k, 0) + c
        self.terms: Dict[ExtGraph, Fraction] = {graphs[k]: c for k, c in acc.items() if c}

    def __add__(self, other: "ExtPoly") -> "ExtPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return ExtPoly(out)

    def __rmul__(self, c):
        return ExtPoly({e: x * rat(c) for e, x in self.terms.items()})


def _expand_one(e: ExtGraph) -> List[Tuple[ColoredGraph, Fraction]]:
    tri = list(e.tri)
    red = list(e.red)
    out = []
    for choice in product((0, 1), repeat=len(e.tetra)):
        t2, r2, c = list(tri), list(red), Fraction(1)
        for (f1, f2, f3, f4), pick in zip(e.tetra, choice):
            a = len(t2)
            if pick == 0:
                t2 += [(f1, f4), (f2, f3)]
                c *= Fraction(1, 6)
            else:
                t2 += [(f1, f3), (f2, f4)]
                c *= Fraction(-1, 6)
            r2.append((a, a + 1))
        rmap = {}
        for x, y in r2:
            rmap[x], rmap[y] = y, x
        g = FlagGraph(dict(enumerate(t2)), e.black_map(), rmap).to_graph()
        out.append((g, c * e.sign))
    return out


def expand_tetravalent(e: ExtPoly) -> GraphPoly:
    """Replace every tetravalent vertex (f1,f2,f3,f4) by
    1/6 [f1f4 | f2f3] - 1/6 [f1f3 | f2f4], the bars being new red edges."""
    pairs = []
    for ext, c in e.terms.items():
        for g, w in _expand_one(ext):
            pairs.append((g, c * w))
    return GraphPoly.from_pairs(pairs)


# ---------------------------------------------------------------------------
# text formats

_TOKEN = re.compile(r"\s*(?:(\d+)|(m)|(\*\*|[-+*/^()]))")


def parse_coeff(text: str):
    """Parse ``p/q``, or an arithmetic expression in ``m`` into a RatFuncM.

    Returns a Fraction when the value does not depend on ``m``.
    """
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt or mt.end() == pos:
            raise ValueError(f"unexpected character at column {pos + 1} in {text!r}")
        num, var, op = mt.groups()
        toks.append(("n", int(num)) if num else ("m", None) if var else ("o", "^" if op == "**" else op))
        pos = mt.end()
    toks.append(("end", None))
    i = 0

    def peek():
        return toks[i]

    def take():
        nonlocal i
        t = toks[i]
        i += 1
        return t

    def expr():
        v = term()
        while peek() in (("o", "+"), ("o", "-")):
            op = take()[1]
            v = v + term() if op == "+" else v - term()
        return v

    def term():
        v = unary()
        while peek() in (("o", "*"), ("o", "/")):
            op = take()[1]
            v = v * unary() if op == "*" else v / unary()
        return v

    def unary():
        if peek() == ("o", "-"):
            take()
            return -unary()
        if peek() == ("o", "+"):
            take()
            return unary()
        return power()

    def power():
        base = atom()
        if peek() == ("o", "^"):
            take()
            kind, k = take()
            if kind != "n":
                raise ValueError("exponent must be a non-negative integer")
            return base ** k
        return base

    def atom():
        kind, val = take()
        if kind == "n":
            return RatFuncM(val)
        if kind == "m":
            return RatFuncM.m()
        if (kind, val) == ("o", "("):
            v = expr()
            if take() != ("o", ")"):
                raise ValueError(f"missing ')' in {text!r}")
            return v
        raise ValueError(f"unexpected token {val!r} in {text!r}")

    v = expr()
    if peek()[0] != "end":
        raise ValueError(f"trailing input in {text!r}")
    if v.den.degree == 0 and v.num.degree <= 0:
        return v.num(0) if not v.is_zero() else Fraction(0)
    return v


def _fmt_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return f"({c})"


def format_poly(p: GraphPoly) -> str:
    if p.is_zero():
        return "0"
    return "\n".join(f"{_fmt_coeff(c)} * {format_graph(g)}" for g, c in p.items())


def _coerce_parsed(c, ring: Optional[str]):
    if ring is None:
        ring = "rat" if isinstance(c, Fraction) else ("polym" if c.den.degree == 0 else "ratfunc")
    if ring == "polym" and isinstance(c, RatFuncM):
        if c.den.degree != 0:
            raise RingMismatch(f"{c} is not a polynomial")
        c = c.num * (1 / c.den.lead())
    return c, ring


def parse_poly(text: str, ring: Optional[str] = None) -> GraphPoly:
    """Parse lines ``<coeff> * c=[...];r=[...]`` (blank and ``#`` lines skipped)."""
    pairs = []
    rings = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        idx = s.rfind("c=")
        if idx < 0:
            raise ValueError(f"line {lineno}: no graph found")
        head = s[:idx].strip()
        if head.endswith("*"):
            head = head[:-1].strip()
        try:
            c = parse_coeff(head) if head else Fraction(1)
        except (ValueError, ArithmeticError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        try:
            g = parse_graph(s[idx:])
        except GraphError as exc:
            raise ValueError(f"line {lineno}, column {idx + 1}: {exc}") from None
        c, r = _coerce_parsed(c, ring)
        rings.add(r)
        pairs.append((g, c))
    target = ring or (max(rings, key=_ORDER.get) if rings else "rat")
    return GraphPoly.from_pairs(pairs, target)


def poly_to_json(p: GraphPoly) -> str:
    recs = [{"coeff": _fmt_coeff(c) if isinstance(c, Fraction) else str(c),
             "graph": format_graph(g)} for g, c in p.items()]
    return json.dumps(recs)


def poly_from_json(text: str, ring: Optional[str] = None) -> GraphPoly:
    recs = json.loads(text)
    lines = [f"{r['coeff']} * {r['graph']}" for r in recs]
    return parse_poly("\n".join(lines), ring)
