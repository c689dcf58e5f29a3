"""Colored trivalent graphs.

Every vertex carries two black flags and one red flag, so the black
subgraph is a disjoint union of cycles and the red edges form a perfect
matching.  A graph is stored as ``(cycles, red)`` where ``red[v]`` is the
red partner of ``v``.  The flag picture is rebuilt on demand by
:class:`FlagGraph`, which is what the rewriting code (IHX moves, curvature
derivation, Einstein reduction, tetravalent expansion) works with.

Canonical forms use a *standard labeling*: cycles sorted by length occupy
consecutive labels and each cycle is labeled in order around itself.  A
graph is then determined by its cycle-length type plus the red array, and
the canonical representative is the one with the smallest red array among
the standard labelings reached by an individualization-refinement search.
"""

from __future__ import annotations

import itertools
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

__all__ = [
    "GraphError", "ColoredGraph", "GraphStats", "Automorphisms",
    "build_graph", "canonical_form", "decode", "automorphisms", "cycle_stats",
    "disjoint_union", "enumerate_degree", "connected_components",
    "parse_graph", "format_graph", "FlagGraph", "ExtGraph", "build_ext_graph",
    "normalize_quadruple", "EMPTY",
]


class GraphError(ValueError):
    """Invalid graph data."""


class MissingVertexError(GraphError):
    pass


class DuplicateVertexError(GraphError):
    pass


class FixedPointError(GraphError):
    pass


class SizeMismatchError(GraphError):
    pass


Cycles = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True, order=False)
class ColoredGraph:
    n: int
    cycles: Cycles
    red: Tuple[int, ...]
    canonical: bool = field(default=False, compare=False)

    @property
    def num_vertices(self) -> int:
        return 2 * self.n

    def red_pairs(self) -> List[Tuple[int, int]]:
        return [(v, w) for v, w in enumerate(self.red) if v < w]

    @property
    def encoding(self) -> bytes:
        return canonical_form(self)

    def sort_key(self):
        return _sort_key(self)

    def __str__(self):
        return format_graph(self)


EMPTY = ColoredGraph(0, (), (), True)


def _sort_key(g: ColoredGraph):
    return (g.n, len(g.cycles), tuple(len(c) for c in g.cycles), g.red)


# ---------------------------------------------------------------------------
# validation and normalization

def _red_array(red, size: int) -> Tuple[int, ...]:
    red = list(red)
    if red and isinstance(red[0], (list, tuple)):
        arr = [-1] * size
        for pair in red:
            if len(pair) != 2:
                raise GraphError(f"red pair {pair!r} is not a pair")
            a, b = pair
            for x in (a, b):
                if not 0 <= x < size:
                    raise MissingVertexError(f"red pair mentions unknown vertex {x}")
            if arr[a] != -1 or arr[b] != -1:
                raise DuplicateVertexError(f"vertex in two red edges: {pair!r}")
            if a == b:
                raise FixedPointError(f"red loop at {a}")
            arr[a], arr[b] = b, a
        if -1 in arr:
            raise MissingVertexError(f"vertex {arr.index(-1)} has no red edge")
        return tuple(arr)
    if len(red) != size:
        raise SizeMismatchError(f"red array has {len(red)} entries for {size} vertices")
    for v, w in enumerate(red):
        if not 0 <= w < size:
            raise MissingVertexError(f"red partner {w} of {v} out of range")
        if w == v:
            raise FixedPointError(f"red matching fixes vertex {v}")
        if red[w] != v:
            raise GraphError(f"red matching is not an involution at {v}")
    return tuple(red)


def _check_cycles(cycles) -> Tuple[Tuple[int, ...], ...]:
    cycles = tuple(tuple(int(v) for v in c) for c in cycles)
    seen = Counter(v for c in cycles for v in c)
    size = sum(len(c) for c in cycles)
    if any(len(c) == 0 for c in cycles):
        raise GraphError("empty black cycle")
    dup = [v for v, k in seen.items() if k > 1]
    if dup:
        raise DuplicateVertexError(f"vertex {min(dup)} appears twice in the cycles")
    if size % 2:
        raise SizeMismatchError("odd number of vertices")
    missing = [v for v in range(size) if v not in seen]
    if missing:
        raise MissingVertexError(f"vertex {missing[0]} missing from the cycles")
    return cycles


def _min_rotation(c: Sequence[int]) -> Tuple[int, ...]:
    L = len(c)
    best = None
    for seq in (list(c), list(reversed(c))):
        for i in range(L):
            cand = tuple(seq[i:] + seq[:i])
            if best is None or cand < best:
                best = cand
    return best


def _normalized_raw(cycles, red) -> ColoredGraph:
    cycles = _check_cycles(cycles)
    size = sum(len(c) for c in cycles)
    red = _red_array(red, size)
    cs = tuple(sorted((_min_rotation(c) for c in cycles), key=lambda c: (len(c), c)))
    return ColoredGraph(size // 2, cs, red, False)


# ---------------------------------------------------------------------------
# canonical labeling

def _refine(colors: List[int], nbrs, red) -> List[int]:
    k = len(set(colors))
    while True:
        sig = [(colors[v], tuple(sorted((colors[nbrs[v][0]], colors[nbrs[v][1]]))),
                colors[red[v]]) for v in range(len(colors))]
        order = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [order[s] for s in sig]
        if len(order) == k:
            return new
        colors, k = new, len(order)


def _standard_labeling(rank: Sequence[int], cycles: Cycles) -> Tuple[int, ...]:
    order = sorted(cycles, key=lambda c: (len(c), min(rank[v] for v in c)))
    label = [0] * len(rank)
    nxt = 0
    for c in order:
        L = len(c)
        i0 = min(range(L), key=lambda i: rank[c[i]])
        if L >= 3 and rank[c[(i0 - 1) % L]] < rank[c[(i0 + 1) % L]]:
            seq = [c[(i0 - k) % L] for k in range(L)]
        else:
            seq = [c[(i0 + k) % L] for k in range(L)]
        for v in seq:
            label[v] = nxt
            nxt += 1
    return tuple(label)


@lru_cache(maxsize=200_000)
def _canon(cycles: Cycles, red: Tuple[int, ...]):
    """Return (canonical red array, sorted lengths, autBar, one best labeling)."""
    size = len(red)
    if size == 0:
        return (), (), 1, ()
    nbrs = [None] * size
    colors = [0] * size
    for c in cycles:
        L = len(c)
        for i, v in enumerate(c):
            nbrs[v] = (c[(i - 1) % L], c[(i + 1) % L])
            colors[v] = L
    lengths = tuple(sorted(len(c) for c in cycles))
    best = None
    best_labels = set()
    witness = None

    def leaf(rank):
        nonlocal best, witness
        lab = _standard_labeling(rank, cycles)
        key = [0] * size
        for v in range(size):
            key[lab[v]] = lab[red[v]]
        key = tuple(key)
        if best is None or key < best:
            best = key
            best_labels.clear()
            best_labels.add(lab)
            witness = lab
        elif key == best:
            best_labels.add(lab)

    def search(cols):
        cols = _refine(cols, nbrs, red)
        counts = Counter(cols)
        if len(counts) == size:
            leaf(cols)
            return
        target = min(c for c, k in counts.items() if k > 1)
        for v in range(size):
            if cols[v] != target:
                continue
            search([2 * cv + (0 if u == v else 1) for u, cv in enumerate(cols)])

    search(colors)
    return best, lengths, len(best_labels), witness


def build_graph(cycles, red) -> ColoredGraph:
    """Validate and canonicalize.

    ``red`` is either an array ``red[v]`` or a list of unordered pairs.
    """
    raw = _normalized_raw(cycles, red)
    return _canonicalize(raw)


def _canonicalize(raw: ColoredGraph) -> ColoredGraph:
    if raw.canonical:
        return raw
    best, lengths, _, _ = _canon(raw.cycles, raw.red)
    cyc, pos = [], 0
    for L in lengths:
        cyc.append(tuple(range(pos, pos + L)))
        pos += L
    return ColoredGraph(raw.n, tuple(cyc), best, True)


def canonical_form(g: ColoredGraph) -> bytes:
    """Byte encoding: degree, cycle count, cycle lengths, canonical red array."""
    c = _canonicalize(g)
    lengths = [len(x) for x in c.cycles]
    return bytes([c.n, len(lengths)] + lengths + list(c.red))


def decode(enc: bytes) -> ColoredGraph:
    n, k = enc[0], enc[1]
    lengths = list(enc[2:2 + k])
    red = list(enc[2 + k:])
    cyc, pos = [], 0
    for L in lengths:
        cyc.append(list(range(pos, pos + L)))
        pos += L
    if len(red) != 2 * n or pos != 2 * n:
        raise SizeMismatchError("corrupt encoding")
    return build_graph(cyc, red)


@dataclass(frozen=True)
class Automorphisms:
    autFlag: int
    aut0: int
    autBar: int


@dataclass(frozen=True)
class GraphStats:
    n: int
    e: int
    g: int
    s: int
    components: int
    blackConnected: bool


def automorphisms(g: ColoredGraph) -> Automorphisms:
    _, _, bar, _ = _canon(g.cycles, g.red)
    s = sum(1 for c in g.cycles if len(c) <= 2)
    aut0 = 2 ** s
    return Automorphisms(bar * aut0, aut0, bar)


def connected_components(g: ColoredGraph) -> List[List[int]]:
    parent = list(range(g.num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for c in g.cycles:
        for v in c[1:]:
            union(c[0], v)
    for v, w in enumerate(g.red):
        union(v, w)
    comps: Dict[int, List[int]] = {}
    for v in range(g.num_vertices):
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


def cycle_stats(g: ColoredGraph) -> GraphStats:
    lengths = [len(c) for c in g.cycles]
    return GraphStats(
        n=g.n,
        e=sum(1 for L in lengths if L % 2 == 0),
        g=sum(1 for L in lengths if L > 2),
        s=sum(1 for L in lengths if L <= 2),
        components=len(connected_components(g)),
        blackConnected=len(lengths) == 1,
    )


def disjoint_union(g1: ColoredGraph, g2: ColoredGraph) -> ColoredGraph:
    shift = g1.num_vertices
    cycles = list(g1.cycles) + [tuple(v + shift for v in c) for c in g2.cycles]
    red = list(g1.red) + [w + shift for w in g2.red]
    return build_graph(cycles, red)


def subgraph(g: ColoredGraph, vertices: Iterable[int]) -> ColoredGraph:
    """Restriction to a union of components, relabeled and canonicalized."""
    vs = sorted(vertices)
    idx = {v: i for i, v in enumerate(vs)}
    cycles = [tuple(idx[v] for v in c) for c in g.cycles if c[0] in idx]
    red = [idx[g.red[v]] for v in vs]
    return build_graph(cycles, red)


def components_of(g: ColoredGraph) -> List[ColoredGraph]:
    return sorted((subgraph(g, c) for c in connected_components(g)), key=_sort_key)


# ---------------------------------------------------------------------------
# enumeration

def _partitions(total: int, largest: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    if largest is None:
        largest = total
    if total == 0:
        yield ()
        return
    for k in range(min(total, largest), 0, -1):
        for rest in _partitions(total - k, k):
            yield (k,) + rest


def _matchings(items: List[int]) -> Iterator[List[Tuple[int, int]]]:
    if not items:
        yield []
        return
    a = items[0]
    for i in range(1, len(items)):
        b = items[i]
        rest = items[1:i] + items[i + 1:]
        for m in _matchings(rest):
            yield [(a, b)] + m


@lru_cache(maxsize=None)
def _enumerate(n: int, connected_black_only: bool) -> Tuple[ColoredGraph, ...]:
    if n == 0:
        return () if connected_black_only else (EMPTY,)
    size = 2 * n
    types = [(size,)] if connected_black_only else list(_partitions(size))
    found: Dict[Tuple, ColoredGraph] = {}
    for parts in types:
        cycles, pos = [], 0
        for L in sorted(parts):
            cycles.append(tuple(range(pos, pos + L)))
            pos += L
        cycles = tuple(cycles)
        for match in _matchings(list(range(size))):
            red = [0] * size
            for a, b in match:
                red[a], red[b] = b, a
            g = _canonicalize(ColoredGraph(n, cycles, tuple(red), False))
            found.setdefault((g.cycles, g.red), g)
    return tuple(sorted(found.values(), key=canonical_form))


def enumerate_degree(n: int, connected_black_only: bool = False) -> List[ColoredGraph]:
    """One canonical representative per isomorphism class, sorted by encoding."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    return list(_enumerate(n, connected_black_only))


# ---------------------------------------------------------------------------
# text format

_GRAPH_RE = re.compile(r"^c=(\[.*\]);r=(\[.*\])$")


def format_graph(g: ColoredGraph) -> str:
    cyc = json.dumps([list(c) for c in g.cycles], separators=(",", ":"))
    red = json.dumps([list(p) for p in g.red_pairs()], separators=(",", ":"))
    return f"c={cyc};r={red}"


def parse_graph(text: str) -> ColoredGraph:
    s = re.sub(r"\s+", "", text)
    mt = _GRAPH_RE.match(s)
    if not mt:
        raise GraphError(f"cannot parse graph {text!r}")
    try:
        cycles = json.loads(mt.group(1))
        red = json.loads(mt.group(2))
    except json.JSONDecodeError as exc:
        raise GraphError(f"bad list syntax in {text!r}: {exc}") from None
    return build_graph(cycles, red)


# ---------------------------------------------------------------------------
# flag-level surgery

class FlagGraph:
    """Mutable flag picture of a (partial) trivalent graph.

    ``vflags[v] = (f0, f1)`` are the black flags of vertex ``v``, ``black`` is
    the black flag involution and ``red`` the red vertex involution.
    """

    def __init__(self, vflags: Dict[int, Tuple[int, int]], black: Dict[int, int],
                 red: Dict[int, int]):
        self.vflags = dict(vflags)
        self.black = dict(black)
        self.red = dict(red)

    @classmethod
    def from_graph(cls, g: ColoredGraph) -> "FlagGraph":
        vflags = {v: (2 * v, 2 * v + 1) for v in range(g.num_vertices)}
        black = {}
        for c in g.cycles:
            L = len(c)
            for i, v in enumerate(c):
                w = c[(i + 1) % L]
                black[2 * v + 1] = 2 * w
                black[2 * w] = 2 * v + 1
        red = {v: w for v, w in enumerate(g.red)}
        return cls(vflags, black, red)

    def owner(self) -> Dict[int, int]:
        return {f: v for v, fs in self.vflags.items() for f in fs}

    def to_graph(self) -> ColoredGraph:
        verts = sorted(self.vflags)
        idx = {v: i for i, v in enumerate(verts)}
        own = self.owner()
        seen = set()
        cycles = []
        for v0 in verts:
            if v0 in seen:
                continue
            f_in, f_out = self.vflags[v0]
            seq = [v0]
            seen.add(v0)
            cur = f_out
            while True:
                nf = self.black[cur]
                w = own[nf]
                if w == v0 and nf == f_in:
                    break
                seq.append(w)
                seen.add(w)
                a, b = self.vflags[w]
                cur = b if nf == a else a
            cycles.append([idx[v] for v in seq])
        red = [idx[self.red[v]] for v in verts]
        return build_graph(cycles, red)

    def splice(self, remove: Sequence[int], joins: Sequence[Tuple[int, int]]):
        """Delete vertices, tie their flags together in pairs along ``joins``.

        Returns the new graph and the number of closed black circles that
        were left without any vertex.
        """
        ports = set()
        for v in remove:
            ports.update(self.vflags[v])
        join = {}
        for a, b in joins:
            join[a], join[b] = b, a
        if set(join) != ports:
            raise GraphError("joins must pair up exactly the removed flags")
        black = {f: t for f, t in self.black.items() if f not in ports}
        visited = set()
        for x in list(black):
            p = black[x]
            if p not in ports or x in visited:
                continue
            # walk port -> join -> black ... until a surviving flag is reached
            cur = p
            while True:
                visited.add(cur)
                q = join[cur]
                visited.add(q)
                nxt = self.black[q]
                if nxt not in ports:
                    break
                cur = nxt
            black[x] = nxt
            black[nxt] = x
            visited.add(x)
            visited.add(nxt)
        circles = 0
        left = ports - visited
        while left:
            start = left.pop()
            cur = start
            while True:
                q = join[cur]
                left.discard(q)
                nxt = self.black[q]
                left.discard(nxt)
                if nxt == start:
                    break
                cur = nxt
            circles += 1
        vflags = {v: fs for v, fs in self.vflags.items() if v not in remove}
        red = {v: w for v, w in self.red.items() if v not in remove}
        return FlagGraph(vflags, black, red), circles

    def rewire(self, ports: Sequence[int], targets: Sequence[int]) -> "FlagGraph":
        """Move the black connection sitting at ``ports[i]`` onto ``targets[i]``.

        ``targets`` is a permutation of ``ports``.
        """
        rho = dict(zip(ports, targets))
        black = {}
        for f, t in self.black.items():
            black[rho.get(f, f)] = rho.get(t, t)
        return FlagGraph(self.vflags, black, self.red)


# ---------------------------------------------------------------------------
# extended graphs with tetravalent vertices

_D4 = [
    ((0, 1, 2, 3), 1), ((1, 0, 3, 2), 1), ((2, 3, 0, 1), 1), ((3, 2, 1, 0), 1),
    ((1, 0, 2, 3), -1), ((0, 1, 3, 2), -1), ((2, 3, 1, 0), -1), ((3, 2, 0, 1), -1),
]


def normalize_quadruple(q: Sequence[int]) -> Tuple[Tuple[int, ...], int]:
    """Smallest reordering of ``q`` that keeps the pairing {f1f2 | f3f4}.

    Reorderings in the Klein four-group keep the orientation; the other four
    swap one pair internally and flip the sign.
    """
    if len(q) != 4 or len(set(q)) != 4:
        raise GraphError(f"decoration {q!r} must list four distinct flags")
    return min((tuple(q[i] for i in perm), s) for perm, s in _D4)


@dataclass(frozen=True)
class ExtGraph:
    """Trivalent vertices (pairs of black flags, red matching) plus
    tetravalent vertices decorated by flag quadruples.  ``black`` holds the
    black edges as sorted flag pairs."""

    tri: Tuple[Tuple[int, int], ...]
    red: Tuple[Tuple[int, int], ...]
    tetra: Tuple[Tuple[int, int, int, int], ...]
    black: Tuple[Tuple[int, int], ...]
    sign: int = 1

    def key(self):
        return (self.tri, self.red, self.tetra, self.black)

    def black_map(self) -> Dict[int, int]:
        out = {}
        for a, b in self.black:
            out[a], out[b] = b, a
        return out

    def to_graph(self) -> ColoredGraph:
        if self.tetra:
            raise GraphError("graph still has tetravalent vertices")
        red = {}
        for a, b in self.red:
            red[a], red[b] = b, a
        return FlagGraph(dict(enumerate(self.tri)), self.black_map(), red).to_graph()


def build_ext_graph(tri: Sequence[Tuple[int, int]], red: Sequence[Tuple[int, int]],
                    tetra: Sequence[Sequence[int]], black: Sequence[Tuple[int, int]],
                    tetra_flags: Optional[Sequence[Iterable[int]]] = None) -> ExtGraph:
    if tetra_flags is not None:
        if len(tetra_flags) != len(tetra):
            raise GraphError("one flag set per tetravalent vertex expected")
        for q, fs in zip(tetra, tetra_flags):
            if sorted(q) != sorted(fs):
                raise GraphError(f"decoration {tuple(q)} does not list the flags {sorted(fs)}")
    flags = [f for pair in tri for f in pair] + [f for q in tetra for f in q]
    if len(flags) != len(set(flags)):
        raise GraphError("a flag belongs to two vertices")
    ends = [f for e in black for f in e]
    if sorted(ends) != sorted(flags):
        raise GraphError("black edges must pair up all flags exactly once")
    nt = len(tri)
    seen = [0] * nt
    for a, b in red:
        if not (0 <= a < nt and 0 <= b < nt) or a == b:
            raise GraphError(f"bad red edge {(a, b)}")
        seen[a] += 1
        seen[b] += 1
    if any(k != 1 for k in seen):
        raise GraphError("red edges must match the trivalent vertices perfectly")
    sign = 1
    quads = []
    for q in tetra:
        nq, s = normalize_quadruple(q)
        quads.append(nq)
        sign *= s
    return ExtGraph(
        tri=tuple(tuple(p) for p in tri),
        red=tuple(sorted(tuple(sorted(p)) for p in red)),
        tetra=tuple(quads),
        black=tuple(sorted(tuple(sorted(e)) for e in black)),
        sign=sign,
    )
