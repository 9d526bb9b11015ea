"""Exhaustive ground truth for small instances.

Every candidate histogram is a weak composition of the allocated total into
the free bins, so scanning all ``C(total + parts - 1, parts - 1)`` of them
gives the exact optimum of each problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .histogram import InfeasibleError, distance
from .slh import SlhInstance
from .tr import AVOID, BUDGET_TOL, RESEMBLE, TrInstance

DEFAULT_CAP = 10**6
TIE_TOL = 1e-12


class CapExceeded(ValueError):
    def __init__(self, cardinality: int, cap: int):
        super().__init__(f"{cardinality} compositions exceed the cap of {cap}")
        self.cardinality = cardinality
        self.cap = cap


def count_compositions(total: int, parts: int) -> int:
    if parts <= 0:
        return 1 if total == 0 else 0
    return math.comb(total + parts - 1, parts - 1)


def enumerate_compositions(total: int, parts: int, cap: int = DEFAULT_CAP) -> Iterator[tuple[int, ...]]:
    """All weak compositions of ``total`` into ``parts``, lexicographically.

    Raises CapExceeded before yielding anything if there are more than ``cap``.
    """
    if total < 0 or parts < 1:
        raise ValueError("need total >= 0 and parts >= 1")
    card = count_compositions(total, parts)
    if card > cap:
        raise CapExceeded(card, cap)
    return _compositions(total, parts)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass
class OracleResult:
    optimum: float
    ties: list[tuple[int, ...]]
    scanned: int

    def contains(self, counts) -> bool:
        return tuple(int(c) for c in counts) in self.ties


def _scan(candidates, objective, sign):
    """Best objective (``sign=1`` minimizes, ``-1`` maximizes) and its ties."""
    best = math.inf
    near: list[tuple[float, tuple[int, ...]]] = []
    scanned = 0
    for counts in candidates:
        scanned += 1
        value = objective(counts)
        if value is None:
            continue
        v = sign * value
        if v < best - TIE_TOL:
            best = v
            near = [(x, c) for x, c in near if x <= best + TIE_TOL]
        if v <= best + TIE_TOL:
            near.append((v, counts))
            best = min(best, v)
    if not near:
        raise InfeasibleError("no candidate satisfies the constraints")
    ties = [c for x, c in near if x <= best + TIE_TOL]
    return OracleResult(sign * best, ties, scanned)


def oracle_slh(inst: SlhInstance, cap: int = DEFAULT_CAP) -> OracleResult:
    """Minimum quality distance over every way of adding ``inst.total`` counts."""
    h = inst.histogram
    counts = h.as_array()
    if inst.nonsensitive_indices().size == 0:
        raise InfeasibleError("every location is sensitive")
    free = [i for i in inst.nonsensitive_indices() if h.vocabulary[i] not in inst.forbidden]
    q = inst.quality.bind(h.size if h.size > 0 else 1)
    base = counts.copy()
    base[inst.sensitive_mask] = 0

    def candidates():
        if not free:
            if inst.total == 0:
                yield tuple(int(c) for c in base)
            return
        for comp in enumerate_compositions(inst.total, len(free), cap):
            out = base.copy()
            out[free] += comp
            yield tuple(int(c) for c in out)

    def objective(out):
        if inst.edge_filter is not None:
            for i in inst.nonsensitive_indices():
                if not inst.edge_filter(h.vocabulary[i], out[i] - counts[i]):
                    return None
        return float(q.finalize(float(np.sum(q.terms(counts, out)))))

    return _scan(candidates(), objective, 1)


def _oracle_target(inst: TrInstance, mode: str, cap: int) -> OracleResult:
    h = inst.histogram.counts
    target = inst.target.counts
    total = inst.allocation_total
    fixed = inst.forbidden_mask
    free = [i for i in range(len(h)) if not fixed[i]]
    rest = total - sum(h[i] for i in range(len(h)) if fixed[i])
    eps = inst.quality.budget(inst.epsilon) + BUDGET_TOL
    if rest < 0 or not free:
        raise InfeasibleError("forbidden bins already exceed the allocation total")

    def candidates():
        for comp in enumerate_compositions(rest, len(free), cap):
            out = list(h)
            for i, c in zip(free, comp):
                out[i] = c
            yield tuple(out)

    def objective(out):
        q_sum = float(np.sum(inst.quality.terms(h, out)))
        if q_sum > eps:
            return None
        return distance(inst.privacy, out, target)

    return _scan(candidates(), objective, 1 if mode == RESEMBLE else -1)


def oracle_tr(inst: TrInstance, cap: int = DEFAULT_CAP) -> OracleResult:
    """Minimum privacy distance over budget-feasible histograms."""
    return _oracle_target(inst, RESEMBLE, cap)


def oracle_ta(inst: TrInstance, cap: int = DEFAULT_CAP) -> OracleResult:
    """Maximum privacy distance over budget-feasible histograms."""
    return _oracle_target(inst, AVOID, cap)
