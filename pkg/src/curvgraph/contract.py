"""Pairwise contraction of small tensor networks.

Every index letter occurs exactly twice in the network (it is a black
edge), so a network is a list of operands, each a tuple of letters.  The
planner merges the pair of operands whose result is smallest, breaking
ties by multiplication count and then by position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

__all__ = ["EvalPlan", "plan_contraction", "run_plan", "naive_contract", "NaiveBudgetError"]

NAIVE_BUDGET = 10 ** 7


class NaiveBudgetError(RuntimeError):
    pass


def _letters(k: int) -> str:
    alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if k > len(alphabet):
        raise ValueError("too many indices for einsum")
    return alphabet[:k]


@dataclass
class EvalPlan:
    operands: List[Tuple[int, ...]]
    # each step: (i, j, result_indices); operands i and j are replaced by the result
    prelude: List[Tuple[int, ...]] = field(default_factory=list)
    steps: List[Tuple[int, int, Tuple[int, ...]]] = field(default_factory=list)
    estimatedCost: int = 0
    graph: object = None


def _self_trace(ix: Tuple[int, ...]) -> Tuple[int, ...]:
    seen: Dict[int, int] = {}
    for x in ix:
        seen[x] = seen.get(x, 0) + 1
    return tuple(x for x in ix if seen[x] == 1)


def plan_contraction(operands: Sequence[Tuple[int, ...]], m: int) -> EvalPlan:
    ops = [tuple(o) for o in operands]
    plan = EvalPlan(list(ops))
    cur = []
    cost = 0
    for o in ops:
        r = _self_trace(o)
        plan.prelude.append(r)
        if r != o:
            cost += m ** len(set(o))
        cur.append(r)
    while len(cur) > 1:
        best = None
        for i in range(len(cur)):
            si = set(cur[i])
            for j in range(i + 1, len(cur)):
                sj = set(cur[j])
                out = tuple(sorted(si ^ sj))
                size = m ** len(out)
                mults = m ** len(si | sj)
                key = (size, mults, i, j)
                if best is None or key < best[0]:
                    best = (key, i, j, out)
        (_, mults, _, _), i, j, out = best
        cost += mults
        plan.steps.append((i, j, out))
        cur = [c for k, c in enumerate(cur) if k not in (i, j)] + [out]
    plan.estimatedCost = cost
    return plan


def run_plan(plan: EvalPlan, tensors: Sequence[np.ndarray]) -> float:
    if not plan.operands:
        return 1.0
    letters = {}

    def spell(ix):
        out = []
        for x in ix:
            if x not in letters:
                letters[x] = _letters(len(letters) + 1)[-1]
            out.append(letters[x])
        return "".join(out)

    cur = []
    for ix, red, t in zip(plan.operands, plan.prelude, tensors):
        if red != ix:
            t = np.einsum(f"{spell(ix)}->{spell(red)}", t)
        cur.append((red, t))
    for i, j, out in plan.steps:
        (a, ta), (b, tb) = cur[i], cur[j]
        t = np.einsum(f"{spell(a)},{spell(b)}->{spell(out)}", ta, tb)
        cur = [c for k, c in enumerate(cur) if k not in (i, j)] + [(out, t)]
    (_, t), = cur
    return float(t)


def naive_contract(operands: Sequence[Tuple[int, ...]], tensors: Sequence[np.ndarray],
                   m: int, budget: int = NAIVE_BUDGET) -> float:
    """Single unoptimized einsum: one loop over every index assignment."""
    if not operands:
        return 1.0
    nidx = len({x for o in operands for x in o})
    if m ** nidx > budget:
        raise NaiveBudgetError(
            f"naive summation needs {m}^{nidx} terms (> {budget}); use the scheduled strategy")
    letters = {x: _letters(k + 1)[-1] for k, x in enumerate(sorted({x for o in operands for x in o}))}
    spec = ",".join("".join(letters[x] for x in o) for o in operands) + "->"
    return float(np.einsum(spec, *tensors, optimize=False))
