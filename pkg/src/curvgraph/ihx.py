"""IHX relations and the reduced graph algebra.

An IHX relation picks a red edge, cuts out its two endpoints and reattaches
the four loose black strands in the three possible ways.  The sum of the
three graphs is the graph-level shadow of the first Bianchi identity.  The
quotient by these relations is computed degree by degree with exact row
reduction; surviving classes (non-pivot columns) serve as coset
representatives.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import GraphPoly, to_ring
from .exactalg import Echelon, echelon, reduce_against
from .graphs import (
    ColoredGraph, FlagGraph, canonical_form, connected_components,
    enumerate_degree,
)

__all__ = [
    "ihx_triple", "ihx_relations", "IhxBasis", "build_quotient", "normal_form",
    "reduce_poly", "connected_black_rank", "stable_dims", "class_order",
]


def ihx_triple(g: ColoredGraph, u: int) -> Tuple[ColoredGraph, ColoredGraph, ColoredGraph]:
    """The I, H and X graphs at the red edge through vertex ``u``."""
    v = g.red[u]
    fg = FlagGraph.from_graph(g)
    a0, a1 = fg.vflags[u]
    b0, b1 = fg.vflags[v]
    ports = [a0, a1, b0, b1]
    I = g
    H = fg.rewire(ports, [a0, b0, a1, b1]).to_graph()
    X = fg.rewire(ports, [a0, b0, b1, a1]).to_graph()
    return I, H, X


def ihx_relations(n: int, order: Optional[Sequence[ColoredGraph]] = None) -> List[GraphPoly]:
    """All distinct IHX relations of degree ``n`` (one per class and red edge)."""
    if n < 1:
        raise ValueError("IHX relations start in degree 1")
    classes = list(order) if order is not None else enumerate_degree(n)
    seen = set()
    out = []
    for g in classes:
        for u, v in g.red_pairs():
            terms: Dict[ColoredGraph, int] = {}
            for h in ihx_triple(g, u):
                terms[h] = terms.get(h, 0) + 1
            key = frozenset(terms.items())
            if key in seen:
                continue
            seen.add(key)
            out.append(GraphPoly(terms))
    return out


def _excess(g: ColoredGraph) -> int:
    return len(g.cycles) - len(connected_components(g))


def class_order(n: int) -> List[ColoredGraph]:
    """Classes of degree ``n`` with the ones that should become pivots first.

    Graphs with more black cycles than components come first, so the
    surviving coset representatives are products of graphs with connected
    black part.  Ties are broken by canonical encoding.
    """
    return sorted(enumerate_degree(n), key=lambda g: (-_excess(g), canonical_form(g)))


class IhxBasis:
    """Echelon basis of the degree-``n`` IHX span plus normal forms."""

    def __init__(self, n: int, class_list: Sequence[ColoredGraph]):
        self.degree = n
        self.classList = list(class_list)
        self.index = {g: i for i, g in enumerate(self.classList)}
        rows = []
        if n >= 1:
            for r in ihx_relations(n, self.classList):
                rows.append({self.index[g]: Fraction(c) for g, c in r.terms.items()})
        self.relationBasis: Echelon = echelon(rows, len(self.classList))
        self._nf: Dict[ColoredGraph, Dict[int, Fraction]] = {}

    @property
    def rank(self) -> int:
        return self.relationBasis.rank

    @property
    def stableDim(self) -> int:
        return len(self.classList) - self.rank

    def survivors(self) -> List[ColoredGraph]:
        piv = set(self.relationBasis.pivots)
        return [g for i, g in enumerate(self.classList) if i not in piv]

    def unit_nf(self, g: ColoredGraph) -> Dict[int, Fraction]:
        r = self._nf.get(g)
        if r is None:
            r = reduce_against(self.relationBasis, {self.index[g]: Fraction(1)})
            self._nf[g] = r
        return r

    def normal_form(self, p: GraphPoly) -> GraphPoly:
        acc: Dict[ColoredGraph, object] = {}
        for g, c in p.terms.items():
            if g.n != self.degree:
                raise ValueError(f"term of degree {g.n} in a degree-{self.degree} normal form")
            for j, x in self.unit_nf(g).items():
                h = self.classList[j]
                acc[h] = acc[h] + c * x if h in acc else c * x
        return GraphPoly(acc, p.ring)


@lru_cache(maxsize=None)
def build_quotient(n: int) -> IhxBasis:
    return IhxBasis(n, class_order(n))


def normal_form(p: GraphPoly, basis: Optional[IhxBasis] = None) -> GraphPoly:
    """Coset representative of a homogeneous polynomial."""
    if basis is None:
        degs = p.degrees()
        if len(degs) > 1:
            raise ValueError("normal_form needs a homogeneous polynomial")
        if not degs:
            return p
        basis = build_quotient(degs[0])
    return basis.normal_form(p)


def reduce_poly(p: GraphPoly) -> GraphPoly:
    """Normal form applied degree by degree."""
    out = GraphPoly.zero(p.ring)
    for n in p.degrees():
        part = GraphPoly({g: c for g, c in p.terms.items() if g.n == n}, p.ring)
        out = out + build_quotient(n).normal_form(part)
    return out


def connected_black_rank(n: int) -> Tuple[int, int]:
    """(number of connected-black classes, independent relations among them).

    The relations are counted in the quotient by IHX *and* by all products
    of lower-degree graphs: the connected-black classes span that space, so
    the count is the number of classes minus its dimension.
    """
    if n < 1:
        raise ValueError("degree must be positive")
    basis = build_quotient(n)
    conn = enumerate_degree(n, True)
    e = Echelon(len(basis.classList))
    for row in basis.relationBasis.basis:
        e.add(row)
    for g in basis.classList:
        if len(connected_components(g)) > 1:
            e.add({basis.index[g]: Fraction(1)})
    indecomposable = len(basis.classList) - e.rank
    return len(conn), len(conn) - indecomposable


def stable_dims(max_n: int) -> List[int]:
    return [build_quotient(n).stableDim for n in range(max_n + 1)]
