"""Target resemblance and target avoidance.

Resemblance picks the integer histogram of a given length and size that is
closest to a target under the privacy distance while staying within a
quality budget of the original. Avoidance picks the farthest one instead.

The optimal solvers walk the allocation DAG where node ``(i, j)`` means
``j`` counts were placed in the first ``i`` bins, and edge
``(i, j) -> (i+1, j+k)`` sets bin ``i+1`` to exactly ``k``. Every edge carries
a pair (privacy error, quality error). Each node keeps the Pareto set of
(accumulated quality, accumulated privacy) labels whose quality stays within
the budget; the answer is the best privacy label at ``(n, total)``.

The heuristics start from the original histogram and greedily move counts
from source bins to destination bins, always taking the move with the best
privacy gain per unit of quality spent.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .histogram import (
    JS,
    BinDistance,
    Histogram,
    HistogramError,
    InfeasibleError,
    TargetHistogram,
    align,
    distance,
)
from .report import SanitizationReport, digest

RESEMBLE = "resemble"
AVOID = "avoid"

# slack on ``d_q <= eps`` for float accumulation; the oracle uses the same value
BUDGET_TOL = 1e-12


def round_half_even(x: float) -> int:
    return int(round(x))


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


ROUNDING = {"half-even": round_half_even, "half-up": round_half_up,
            "floor": math.floor, "ceil": math.ceil}


@dataclass(frozen=True)
class TrInstance:
    """A resemblance (``mode="resemble"``) or avoidance problem.

    The user histogram and the target are aligned on construction. With
    ``size_from_target`` the optimal solvers allocate ``|H''|_1`` counts
    (rounded with ``rounding``) instead of ``|H|_1``. ``delta > 0`` merges
    Pareto labels whose quality differs by less than ``delta``, trading
    exactness for a bounded label count. ``forbidden`` bins keep their
    original count.
    """

    histogram: Histogram
    target: TargetHistogram
    epsilon: float
    privacy: BinDistance = field(default_factory=lambda: BinDistance(JS))
    quality: BinDistance = field(default_factory=lambda: BinDistance(JS))
    c: float | None = None
    mode: str = RESEMBLE
    size_from_target: bool = False
    rounding: str = "half-even"
    delta: float = 0.0
    forbidden: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise HistogramError("epsilon must be nonnegative")
        if self.mode not in (RESEMBLE, AVOID):
            raise HistogramError(f"mode must be {RESEMBLE!r} or {AVOID!r}")
        if self.rounding not in ROUNDING:
            raise HistogramError(f"unknown rounding {self.rounding!r}")
        if self.delta < 0:
            raise HistogramError("delta must be nonnegative")
        h, t = self.histogram, self.target
        if not isinstance(t, TargetHistogram):
            t = TargetHistogram(tuple(t.counts), t.vocabulary)
        h, t = align(h, t)
        object.__setattr__(self, "histogram", h)
        object.__setattr__(self, "target", t)
        object.__setattr__(self, "forbidden", frozenset(self.forbidden))
        unknown = self.forbidden - set(h.vocabulary)
        if unknown:
            raise HistogramError(f"forbidden locations not in histogram: {sorted(unknown)}")
        size = h.size if h.size > 0 else 1
        object.__setattr__(self, "privacy", self.privacy.bind(size))
        object.__setattr__(self, "quality", self.quality.bind(size))

    @property
    def allocation_total(self) -> int:
        if self.size_from_target:
            return int(ROUNDING[self.rounding](self.target.size))
        return self.histogram.size

    @property
    def forbidden_mask(self) -> np.ndarray:
        return np.array([v in self.forbidden for v in self.histogram.vocabulary])

    def describe(self) -> dict:
        return {
            "histogram": self.histogram.to_json(),
            "target": self.target.to_json(),
            "epsilon": self.epsilon,
            "privacy": self.privacy.to_json(),
            "quality": self.quality.to_json(),
            "c": self.c,
            "mode": self.mode,
            "size_from_target": self.size_from_target,
            "rounding": self.rounding,
            "delta": self.delta,
            "forbidden": sorted(self.forbidden),
        }

    def parameters(self) -> dict:
        return {"epsilon": self.epsilon, "c": self.c, "mode": self.mode,
                "d_p": self.privacy.kind, "d_q": self.quality.kind,
                "allocation_total": self.allocation_total, "delta": self.delta}

    def verdict(self, d_p: float) -> bool | None:
        if self.c is None:
            return None
        return d_p <= self.c if self.mode == RESEMBLE else d_p >= self.c


def ro_edge_weights(inst: TrInstance, b: int, total: int) -> tuple[np.ndarray, np.ndarray]:
    """(privacy error, quality error) of setting bin ``b`` to ``k = 0..total``."""
    ks = np.arange(total + 1)
    p_err = inst.privacy.terms(ks, inst.target.counts[b])
    q_err = inst.quality.terms(inst.histogram.counts[b], ks)
    return p_err, q_err


def _finish(inst, solver, counts, telemetry, t0) -> SanitizationReport:
    h = inst.histogram
    result = h.with_counts(counts)
    d_q = distance(inst.quality, h, result)
    d_p = distance(inst.privacy, result.as_array(), inst.target.as_array())
    telemetry["wall_time_ms"] = (time.perf_counter() - t0) * 1e3
    return SanitizationReport(
        solver=solver,
        histogram=result,
        d_q=d_q,
        d_p=d_p,
        feasible_vs_c=inst.verdict(d_p),
        parameters=inst.parameters(),
        telemetry=telemetry,
        input_digest=digest(inst.describe()),
    )


# ---------------------------------------------------------------------------
# optimal solvers

def _pareto_keep(node, q, key, cost, order):
    """Masks (in ``order``) of surviving labels and of survivors that won a tie.

    ``key`` is a rank of (privacy cost, deviation, lexicographic position),
    all of which extend along a path. ``order`` sorts by node, then q, so a
    label survives iff its key is below every earlier label's key in the
    same node. A survivor "won a tie" when it pruned a label of equal cost,
    i.e. the deviation or lexicographic rule made the choice.
    """
    node_s = node[order]
    key_s = key[order]
    cost_s = cost[order]
    keep = np.zeros(order.size, dtype=bool)
    won = np.zeros(order.size, dtype=bool)
    starts = np.flatnonzero(np.r_[True, node_s[1:] != node_s[:-1]])
    ends = np.r_[starts[1:], order.size]
    for s, e in zip(starts, ends):
        k = key_s[s:e]
        run = np.minimum.accumulate(k)
        keep[s] = True
        keep[s + 1:e] = k[1:] < run[:-1]
        # the latest survivor holds the running minimum
        idx = np.arange(s, e)
        last = np.maximum.accumulate(np.where(keep[s:e], idx, s))
        lost = idx[~keep[s:e]]
        dom = last[lost - s]
        won[dom[cost_s[lost] == cost_s[dom]]] = True
    return keep, won


def _quantize(node_s, q_s, delta):
    """Within each node keep the last (cheapest) label of every q-window."""
    keep = np.zeros(q_s.size, dtype=bool)
    i = 0
    m = q_s.size
    while i < m:
        j = i
        while j + 1 < m and node_s[j + 1] == node_s[i] and q_s[j + 1] - q_s[i] < delta:
            j += 1
        keep[j] = True
        i = j + 1
    return keep


def optimal_solve(inst: TrInstance) -> SanitizationReport:
    """Exact constrained shortest (resemble) or longest (avoid) path."""
    t0 = time.perf_counter()
    h = inst.histogram.as_array()
    n = h.size
    total = inst.allocation_total
    if total < 0:
        raise HistogramError("allocation total must be nonnegative")
    budget = inst.quality.budget(inst.epsilon) + BUDGET_TOL
    sign = 1.0 if inst.mode == RESEMBLE else -1.0
    forbidden = inst.forbidden_mask

    # label arrays for the current layer
    node = np.zeros(1, dtype=np.int64)
    q = np.zeros(1)
    cost = np.zeros(1)
    dev = np.zeros(1, dtype=np.int64)
    rank = np.zeros(1, dtype=np.int64)
    backs, allocs, tie_won = [], [], []
    max_labels = 1

    for b in range(n):
        p_err, q_err = ro_edge_weights(inst, b, total)
        ks = np.arange(total + 1)
        ok = q_err <= budget
        if forbidden[b]:
            ok &= ks == h[b]
        if b == n - 1:
            # last bin takes whatever is left
            kk = total - node
            sel = (kk >= 0) & ok[np.clip(kk, 0, total)]
            li = np.flatnonzero(sel)
            kc = kk[li]
        else:
            kset = ks[ok]
            li, kc = np.nonzero((node[:, None] + kset[None, :]) <= total)
            kc = kset[kc]
        new_node = node[li] + kc
        new_q = q[li] + q_err[kc]
        fits = new_q <= budget
        li, kc, new_node, new_q = li[fits], kc[fits], new_node[fits], new_q[fits]
        new_cost = cost[li] + sign * p_err[kc]
        new_dev = dev[li] + np.abs(kc - h[b])
        lex = rank[li] * (total + 1) + kc
        if li.size == 0:
            break

        key = np.empty(li.size, dtype=np.int64)
        key[np.lexsort((lex, new_dev, new_cost))] = np.arange(li.size)
        order = np.lexsort((key, new_q, new_node))
        keep, won = _pareto_keep(new_node, new_q, key, new_cost, order)
        won = won[keep]
        order = order[keep]
        if inst.delta > 0:
            merged = _quantize(new_node[order], new_q[order], inst.delta)
            order, won = order[merged], won[merged]

        node, q, cost, dev = new_node[order], new_q[order], new_cost[order], new_dev[order]
        rank = np.unique(lex[order], return_inverse=True)[1].astype(np.int64)
        backs.append(li[order])
        allocs.append(kc[order])
        tie_won.append(won)
        max_labels = max(max_labels, node.size)

    final = np.flatnonzero(node == total) if len(backs) == n else np.array([], dtype=np.int64)
    if final.size == 0:
        # only reachable with forbidden bins or a size-from-target total that
        # the budget cannot accommodate
        raise InfeasibleError("no allocation satisfies the quality budget")
    best_cost = cost[final].min()
    cand = final[cost[final] == best_cost]
    ties = cand.size > 1
    pick = cand[np.lexsort((rank[cand], dev[cand]))[0]]

    out = np.zeros(n, dtype=np.int64)
    idx = pick
    for b in range(n - 1, -1, -1):
        out[b] = allocs[b][idx]
        ties |= bool(tie_won[b][idx])
        idx = backs[b][idx]

    telemetry = {
        "max_labels_per_layer": int(max_labels),
        "q_length": float(inst.quality.finalize(q[pick])),
        "p_length": float(inst.privacy.finalize(sign * cost[pick])),
        "tie_note": bool(ties),
    }
    solver = "ro" if inst.mode == RESEMBLE else "ao"
    return _finish(inst, solver, out, telemetry, t0)


def ro_solve(inst: TrInstance) -> SanitizationReport:
    """Optimal resemblance: minimize d_p(H', H'') subject to d_q(H, H') <= eps."""
    if inst.mode != RESEMBLE:
        inst = _with_mode(inst, RESEMBLE)
    return optimal_solve(inst)


def ao_solve(inst: TrInstance) -> SanitizationReport:
    """Optimal avoidance: maximize d_p(H', H'') subject to d_q(H, H') <= eps."""
    if inst.mode != AVOID:
        inst = _with_mode(inst, AVOID)
    return optimal_solve(inst)


def _with_mode(inst: TrInstance, mode: str) -> TrInstance:
    return replace(inst, mode=mode)


# ---------------------------------------------------------------------------
# heuristics

@dataclass
class HeuristicState:
    """Mutable state of a greedy run.

    ``p_table[b, x]`` and ``q_table[b, x]`` hold the privacy and quality
    terms of bin ``b`` holding ``x`` counts, so scoring a move is a lookup.
    """

    original: np.ndarray
    target: np.ndarray
    current: np.ndarray
    privacy: BinDistance
    quality: BinDistance
    eps_rem: float
    mode: str = RESEMBLE
    src: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    dst: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    p_table: np.ndarray = field(default=None, repr=False)
    q_table: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.p_table is None:
            xs = np.arange(int(self.current.sum()) + 1)
            self.p_table = self.privacy.terms(xs[None, :], self.target[:, None])
            self.q_table = self.quality.terms(self.original[:, None], xs[None, :])

    def _rows(self):
        return np.arange(self.current.size)

    def p_sum(self) -> float:
        return float(np.sum(self.p_table[self._rows(), self.current]))

    def q_sum(self) -> float:
        return float(np.sum(self.q_table[self._rows(), self.current]))


@dataclass(frozen=True)
class Move:
    source: int
    destination: int
    k: int
    delta_p: float
    delta_q: float

    @property
    def ratio(self) -> float:
        return self.delta_p / self.delta_q


def best_move(state: HeuristicState) -> Move | None:
    """Best-ratio count transfer from a source bin to a destination bin.

    Every move of ``k = 1..H'[i]`` counts from source ``i`` to destination
    ``j != i`` is scored by its privacy gain over its quality cost. Only moves
    that gain privacy and whose quality cost is below the remaining budget
    qualify. Returns ``None`` when no move qualifies. Among equal ratios the
    first in (source, destination, k) order wins.
    """
    cur = state.current
    src, dst = state.src, state.dst
    if src.size == 0 or dst.size == 0:
        return None
    kmax = int(cur[src].max())
    if kmax == 0:
        return None
    ks = np.arange(1, kmax + 1)
    top = state.p_table.shape[1] - 1

    src_after = cur[src][:, None] - ks[None, :]
    valid_k = src_after >= 0
    src_after = np.maximum(src_after, 0)
    dst_after = np.minimum(cur[dst][:, None] + ks[None, :], top)
    pt, qt = state.p_table, state.q_table
    dp_src = pt[src[:, None], src_after] - pt[src, cur[src]][:, None]
    dq_src = qt[src[:, None], src_after] - qt[src, cur[src]][:, None]
    dp_dst = pt[dst[:, None], dst_after] - pt[dst, cur[dst]][:, None]
    dq_dst = qt[dst[:, None], dst_after] - qt[dst, cur[dst]][:, None]

    # axes: (source, destination, k)
    d_p = dp_src[:, None, :] + dp_dst[None, :, :]
    d_q = dq_src[:, None, :] + dq_dst[None, :, :]
    if state.privacy.kind == "l2" or state.quality.kind == "l2":
        p0, q0 = state.p_sum(), state.q_sum()
        d_p = state.privacy.finalize(p0 + d_p) - state.privacy.finalize(p0)
        d_q = state.quality.finalize(q0 + d_q) - state.quality.finalize(q0)
    gain = -d_p if state.mode == RESEMBLE else d_p

    ok = (valid_k[:, None, :] & (src[:, None, None] != dst[None, :, None])
          & (gain > 0) & (d_q > 0) & (d_q < state.eps_rem))
    if not ok.any():
        return None
    ratio = np.where(ok, gain / np.where(ok, d_q, 1.0), -np.inf)
    a, b, c = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return Move(int(src[a]), int(dst[b]), int(ks[c]), float(gain[a, b, c]), float(d_q[a, b, c]))


def _bins(state: HeuristicState, first: bool, allowed: np.ndarray):
    cur, tgt = state.current, state.target
    if state.mode == RESEMBLE:
        src = cur > tgt
        dst = cur < tgt
    else:
        src = (cur <= tgt) if first else ((cur > 0) & (cur <= tgt))
        dst = cur >= tgt
    return np.flatnonzero(src & allowed), np.flatnonzero(dst & allowed)


def heuristic_solve(inst: TrInstance, max_moves: int | None = None) -> SanitizationReport:
    """Greedy resemblance (RH) or avoidance (AH); preserves ``|H|_1``."""
    t0 = time.perf_counter()
    h = inst.histogram.as_array()
    state = HeuristicState(
        original=h.astype(np.float64),
        target=inst.target.as_array(),
        current=h.copy(),
        privacy=inst.privacy,
        quality=inst.quality,
        eps_rem=float(inst.epsilon),
        mode=inst.mode,
    )
    allowed = ~inst.forbidden_mask
    state.src, state.dst = _bins(state, True, allowed)
    moves = []
    trace = [float(inst.privacy.finalize(state.p_sum()))]
    while state.src.size:
        if max_moves is not None and len(moves) >= max_moves:
            break
        mv = best_move(state)
        if mv is None:
            break
        state.current[mv.source] -= mv.k
        state.current[mv.destination] += mv.k
        state.eps_rem -= mv.delta_q
        moves.append((mv.source, mv.destination, mv.k))
        trace.append(float(inst.privacy.finalize(state.p_sum())))
        state.src, state.dst = _bins(state, False, allowed)

    telemetry = {"moves": moves, "d_p_trace": trace, "eps_remaining": state.eps_rem,
                 "tie_note": False}
    solver = "rh" if inst.mode == RESEMBLE else "ah"
    return _finish(inst, solver, state.current, telemetry, t0)


def rh_solve(inst: TrInstance) -> SanitizationReport:
    """Greedy resemblance; never exceeds the quality budget."""
    if inst.mode != RESEMBLE:
        inst = _with_mode(inst, RESEMBLE)
    return heuristic_solve(inst)


def ah_solve(inst: TrInstance) -> SanitizationReport:
    """Greedy avoidance; never exceeds the quality budget."""
    if inst.mode != AVOID:
        inst = _with_mode(inst, AVOID)
    return heuristic_solve(inst)
