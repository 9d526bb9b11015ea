"""Sensitive location hiding.

Zero every sensitive bin and redistribute the removed counts over the
nonsensitive bins so that the quality distance to the original histogram is
minimal. The search space is the layered DAG whose node ``(i, j)`` means
``j`` counts were added to the first ``i`` nonsensitive bins; an edge
``(i, j) -> (i+1, j+k)`` costs ``q(H[i+1], H[i+1] + k)``. The shortest
``(0, 0) -> (m, K)`` path is found layer by layer without building the graph.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .histogram import (
    JS,
    BinDistance,
    Histogram,
    HistogramError,
    InfeasibleError,
    distance,
)
from .report import SanitizationReport, digest

# edge_filter(location_id, added_counts) -> allowed?
EdgeFilter = Callable[[str, int], bool]


@dataclass(frozen=True)
class SlhInstance:
    """One hiding problem.

    ``redistribution_total`` is the number of counts to add to nonsensitive
    bins; ``None`` means K, the total count of the sensitive bins.
    ``forbidden`` locations never receive counts (e.g. never-visited places).
    ``edge_filter`` can veto individual (location, added count) choices, which
    is how implausible histograms are kept out of the search.
    """

    histogram: Histogram
    sensitive: frozenset[str] = frozenset()
    quality: BinDistance = field(default_factory=lambda: BinDistance(JS))
    redistribution_total: int | None = None
    forbidden: frozenset[str] = frozenset()
    edge_filter: EdgeFilter | None = None

    def __post_init__(self):
        object.__setattr__(self, "sensitive", frozenset(self.sensitive))
        object.__setattr__(self, "forbidden", frozenset(self.forbidden))
        unknown = (self.sensitive | self.forbidden) - set(self.histogram.vocabulary)
        if unknown:
            raise HistogramError(f"locations not in histogram: {sorted(unknown)}")
        if self.redistribution_total is not None and self.redistribution_total < 0:
            raise HistogramError("redistribution total must be nonnegative")

    @property
    def sensitive_mask(self) -> np.ndarray:
        return np.array([v in self.sensitive for v in self.histogram.vocabulary])

    @property
    def K(self) -> int:
        h = self.histogram
        return int(sum(c for v, c in zip(h.vocabulary, h.counts) if v in self.sensitive))

    @property
    def total(self) -> int:
        return self.K if self.redistribution_total is None else int(self.redistribution_total)

    def nonsensitive_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.sensitive_mask)

    def describe(self) -> dict:
        return {
            "histogram": self.histogram.to_json(),
            "sensitive": sorted(self.sensitive),
            "quality": self.quality.to_json(),
            "r": self.redistribution_total,
            "forbidden": sorted(self.forbidden),
        }


def lho_edge_weights(h_count: int, total: int, quality: BinDistance) -> np.ndarray:
    """``E[k] = q(c, c + k)`` for ``k = 0..total``."""
    ks = np.arange(total + 1)
    return quality.terms(h_count, h_count + ks)


def path_from_additions(additions: Iterable[int]) -> list[tuple[int, int]]:
    """Node sequence ``(0,0), (1,k1), ...`` of the path adding these counts."""
    path = [(0, 0)]
    j = 0
    for i, k in enumerate(additions, start=1):
        j += int(k)
        path.append((i, j))
    return path


def additions_from_path(path: list[tuple[int, int]]) -> list[int]:
    return [b[1] - a[1] for a, b in zip(path, path[1:])]


def _shortest_allocation(weights: list[np.ndarray], total: int):
    """Layered DP: cheapest way to add exactly ``total`` counts.

    ``weights[b][k]`` is the cost of adding ``k`` to bin ``b`` (``inf`` when
    disallowed). Ties go to the smaller ``k`` in the later bin. The second
    return value says whether any node on the chosen path had a tied
    predecessor.
    """
    INF = np.inf
    cost = np.full(total + 1, INF)
    cost[0] = 0.0
    choice, tied = [], []
    jj = np.arange(total + 1)
    kk = np.arange(total + 1)
    prev_idx = jj[:, None] - kk[None, :]          # j' - k
    valid = prev_idx >= 0
    prev_idx = np.where(valid, prev_idx, 0)
    for w in weights:
        cand = np.where(valid, cost[prev_idx] + w[None, :], INF)
        best_k = np.argmin(cand, axis=1)          # first minimum -> smallest k
        new = cand[jj, best_k]
        tied.append(np.isfinite(new) & ((cand == new[:, None]).sum(axis=1) > 1))
        cost = new
        choice.append(best_k)
    if not np.isfinite(cost[total]):
        return None, False
    adds = []
    ties = False
    j = total
    for best_k, tie in zip(reversed(choice), reversed(tied)):
        ties |= bool(tie[j])
        k = int(best_k[j])
        adds.append(k)
        j -= k
    adds.reverse()
    return adds, ties


def lho_solve(inst: SlhInstance) -> SanitizationReport:
    """Optimal hiding: sensitive bins zeroed, ``inst.total`` counts added."""
    t0 = time.perf_counter()
    h = inst.histogram
    counts = h.as_array()
    q = inst.quality.bind(h.size) if h.size > 0 else inst.quality.bind(1)
    free = inst.nonsensitive_indices()
    total = inst.total
    if free.size == 0:
        raise InfeasibleError("every location is sensitive; nowhere to move the counts")

    weights = []
    for b in free:
        loc = h.vocabulary[b]
        w = lho_edge_weights(int(counts[b]), total, q).copy()
        if loc in inst.forbidden:
            w[1:] = np.inf
        if inst.edge_filter is not None:
            for k in range(total + 1):
                if not inst.edge_filter(loc, k):
                    w[k] = np.inf
        weights.append(w)

    adds, ties = _shortest_allocation(weights, total)
    if adds is None:
        raise InfeasibleError("no admissible redistribution (all allocations filtered out)")

    out = counts.copy()
    out[inst.sensitive_mask] = 0
    out[free] += np.asarray(adds, dtype=np.int64)
    result = h.with_counts(out)
    d_q = distance(q, h, result)
    return SanitizationReport(
        solver="lho" if inst.redistribution_total is None else "slh_r",
        histogram=result,
        d_q=d_q,
        parameters={"r": total, "K": inst.K, "distance": q.kind,
                    "sensitive": sorted(inst.sensitive)},
        telemetry={
            "path": path_from_additions(adds),
            "layers": int(free.size),
            "tie_note": ties,
            "wall_time_ms": (time.perf_counter() - t0) * 1e3,
        },
        input_digest=digest(inst.describe()),
    )


def slh_r_solve(inst: SlhInstance, r: int | None = None) -> SanitizationReport:
    """Hiding with exactly ``r`` counts redistributed (``r = K`` is plain SLH)."""
    if r is not None:
        inst = replace(inst, redistribution_total=r)
    rep = lho_solve(inst)
    rep.solver = "slh_r"
    return rep


def proportional_baseline(inst: SlhInstance) -> SanitizationReport:
    """Add ``H[i] * K / (N - K)`` to every nonsensitive bin.

    Raises InfeasibleError when some share is not an integer or N == K.
    """
    t0 = time.perf_counter()
    h = inst.histogram
    counts = h.as_array()
    K, N = inst.K, h.size
    mask = inst.sensitive_mask
    if K == 0:
        out = counts.copy()
    else:
        rest = N - K
        if rest == 0:
            raise InfeasibleError("no nonsensitive counts to scale (N == K)")
        if np.any((counts[~mask] * K) % rest):
            raise InfeasibleError("proportional shares are not integers")
        out = counts.copy()
        out[~mask] += counts[~mask] * K // rest
        out[mask] = 0
    result = h.with_counts(out)
    q = inst.quality.bind(N) if N > 0 else inst.quality.bind(1)
    return SanitizationReport(
        solver="proportional",
        histogram=result,
        d_q=distance(q, h, result),
        parameters={"K": K, "distance": q.kind, "sensitive": sorted(inst.sensitive)},
        telemetry={"wall_time_ms": (time.perf_counter() - t0) * 1e3},
        input_digest=digest(inst.describe()),
    )
