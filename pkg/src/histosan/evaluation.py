"""Utility measures for sanitized histograms.

Clustering agreement: each histogram's counts are split into ``k`` groups by
optimal one-dimensional k-means, and the clusterings of the original and the
sanitized histogram are compared by normalized conditional entropy.

Recommendation error: user-based collaborative filtering with Pearson
similarity predicts a held-out visit count for test users; MAE and RMSE over
a random 90/10 split measure how much sanitization hurts predictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .histogram import Histogram, HistogramError


@dataclass(frozen=True)
class Clustering:
    """Cluster index per element; clusters are numbered by increasing mean."""

    assignment: tuple[int, ...]
    k: int
    cost: float = float("nan")

    def __post_init__(self):
        labels = set(self.assignment)
        if labels != set(range(self.k)):
            raise HistogramError("clusters must be nonempty and numbered 0..k-1")

    def clusters(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for i, c in enumerate(self.assignment):
            out[c].append(i)
        return out


def sse(values: Sequence[float]) -> float:
    v = np.asarray(values, dtype=np.float64)
    return float(np.sum((v - v.mean()) ** 2)) if v.size else 0.0


def ckmeans(values: Sequence[float], k: int) -> Clustering:
    """Optimal 1-D k-means by dynamic programming over sorted values.

    Minimizes the within-cluster sum of squared deviations from the cluster
    means. Optimal clusters are contiguous runs of the sorted values, so
    ``D[c][i]`` (best cost of the first ``i`` sorted values in ``c``
    clusters) satisfies ``D[c][i] = min_j D[c-1][j] + sse(x[j:i])``.
    """
    x = np.asarray(values, dtype=np.float64)
    m = x.size
    if not 1 <= k <= m:
        raise HistogramError(f"need 1 <= k <= {m}, got k={k}")
    order = np.argsort(x, kind="stable")
    xs = x[order]
    s1 = np.r_[0.0, np.cumsum(xs)]
    s2 = np.r_[0.0, np.cumsum(xs * xs)]

    # seg[j, i] = sse of xs[j:i] for j < i
    j = np.arange(m + 1)[:, None]
    i = np.arange(m + 1)[None, :]
    cnt = np.where(i > j, i - j, 1)
    seg = (s2[i] - s2[j]) - (s1[i] - s1[j]) ** 2 / cnt
    seg = np.where(i > j, np.maximum(seg, 0.0), np.inf)

    D = np.full((k + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    arg = np.zeros((k + 1, m + 1), dtype=np.int64)
    for c in range(1, k + 1):
        cand = D[c - 1][:, None] + seg
        arg[c] = np.argmin(cand, axis=0)
        D[c] = cand[arg[c], np.arange(m + 1)]

    bounds = []
    end = m
    for c in range(k, 0, -1):
        start = int(arg[c, end])
        bounds.append((start, end))
        end = start
    bounds.reverse()
    labels = np.empty(m, dtype=np.int64)
    for c, (a, b) in enumerate(bounds):
        labels[order[a:b]] = c
    return Clustering(tuple(int(v) for v in labels), k, float(D[k, m]))


def clustering_cost(values: Sequence[float], clustering: Clustering) -> float:
    x = np.asarray(values, dtype=np.float64)
    return sum(sse(x[idx]) for idx in clustering.clusters())


def entropy(clustering: Clustering, total: int | None = None) -> float:
    total = total or len(clustering.assignment)
    return -sum((len(c) / total) * math.log(len(c) / total) for c in clustering.clusters() if c)


def conditional_entropy(candidate: Clustering, reference: Clustering, total: int | None = None) -> float:
    """Entropy of ``candidate`` given ``reference`` (natural log)."""
    if len(candidate.assignment) != len(reference.assignment):
        raise HistogramError("clusterings cover different numbers of elements")
    total = total or len(reference.assignment)
    joint: dict[tuple[int, int], int] = {}
    for a, b in zip(reference.assignment, candidate.assignment):
        joint[a, b] = joint.get((a, b), 0) + 1
    ref_sizes = [len(c) for c in reference.clusters()]
    out = 0.0
    for (a, _), nab in joint.items():
        out += (nab / total) * math.log(ref_sizes[a] / nab)
    return out


def nce(reference: Clustering, candidate: Clustering, total: int | None = None) -> float:
    """Normalized conditional entropy ``H(C'|C) / H(C')``.

    0 for identical clusterings, 1 for independent ones. Defined as 0 when
    the candidate is a single cluster (``H(C') = 0``).
    """
    h = entropy(candidate, total)
    if h <= 0:
        return 0.0
    # H(C'|C) <= H(C'); clamp the rounding error of the two sums
    return min(max(conditional_entropy(candidate, reference, total) / h, 0.0), 1.0)


def histogram_nce(before: Histogram | Sequence[int], after: Histogram | Sequence[int], k: int = 3) -> float:
    """NCE between the k-means clusterings of two equal-length histograms."""
    a = before.counts if isinstance(before, Histogram) else tuple(before)
    b = after.counts if isinstance(after, Histogram) else tuple(after)
    if len(a) != len(b):
        raise HistogramError("histograms must have the same length")
    k = min(k, len(a))
    return nce(ckmeans(a, k), ckmeans(b, k))


# ---------------------------------------------------------------------------
# collaborative filtering

def _visited(h: Histogram) -> dict[str, int]:
    return {v: c for v, c in zip(h.vocabulary, h.counts) if c > 0}


def mean_visits(h: Histogram) -> float:
    """Average count over the locations the user visited."""
    vis = _visited(h)
    return sum(vis.values()) / len(vis) if vis else 0.0


def pcc(u: Histogram, alpha: Histogram, exclude=()) -> float | None:
    """Pearson correlation over locations both users visited.

    Deviations are taken from each user's own mean visit count. Locations in
    ``exclude`` are left out of the shared set. Returns ``None`` when the
    shared set is empty or either side has zero variance on it.
    """
    fu, fa = _visited(u), _visited(alpha)
    shared = sorted((set(fu) & set(fa)) - set(exclude))
    if not shared:
        return None
    mu_u, mu_a = mean_visits(u), mean_visits(alpha)
    du = np.array([fu[l] - mu_u for l in shared])
    da = np.array([fa[l] - mu_a for l in shared])
    den = math.sqrt(float(np.sum(da * da)) * float(np.sum(du * du)))
    if den == 0.0:
        return None
    return float(np.clip(np.sum(da * du) / den, -1.0, 1.0))


@dataclass
class CfModel:
    """User-based collaborative filtering over a training set of histograms."""

    train: Mapping[str, Histogram]
    neighbors: int = 25
    drop_negative: bool = False
    _means: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.neighbors < 1:
            raise HistogramError("need at least one neighbor")
        self._means = {uid: mean_visits(h) for uid, h in self.train.items()}

    def top_neighbors(self, alpha: Histogram, exclude=(), skip=()) -> list[tuple[str, float]]:
        """Most similar training users: PCC descending, ties by user id."""
        scored = []
        for uid in sorted(self.train):
            if uid in skip:
                continue
            s = pcc(self.train[uid], alpha, exclude)
            if s is None or (self.drop_negative and s < 0):
                continue
            scored.append((uid, s))
        scored.sort(key=lambda t: (-t[1], t[0]))
        return scored[: self.neighbors]


def recommend_score(alpha: Histogram, location: str, model: CfModel, exclude=None,
                    skip=()) -> float:
    """Predicted visit count of ``alpha`` at ``location``.

    ``mu_a + sum (f_u(L) - mu_u) * pcc / sum pcc`` over the top neighbors,
    with ``location`` excluded from the similarity unless ``exclude`` says
    otherwise. Falls back to ``mu_a`` when the similarities sum to zero.
    """
    exclude = (location,) if exclude is None else exclude
    mu_a = mean_visits(alpha)
    nbrs = model.top_neighbors(alpha, exclude, skip)
    den = math.fsum(s for _, s in nbrs)
    if den == 0.0:
        return mu_a
    num = math.fsum((model.train[uid].get(location, 0) - model._means[uid]) * s for uid, s in nbrs)
    return mu_a + num / den


MAE = "mae"
RMSE = "rmse"


@dataclass
class CfRun:
    """Per-test-user outcome of one seeded split."""

    seed: int
    train: list[str]
    test: list[tuple[str, str, float, float]]  # user, held-out location, true, predicted

    @property
    def errors(self) -> np.ndarray:
        return np.array([t - p for _, _, t, p in self.test], dtype=np.float64)

    @property
    def mae(self) -> float:
        return float(np.mean(np.abs(self.errors)))

    @property
    def rmse(self) -> float:
        return float(np.sqrt(np.mean(self.errors ** 2)))


def cf_run(dataset: Mapping[str, Histogram], seed: int, neighbors: int = 25,
           test_fraction: float = 0.1, drop_negative: bool = False) -> CfRun:
    """Random 90/10 split, one random held-out visited location per test user."""
    if len(dataset) < 10:
        raise HistogramError("collaborative filtering needs at least 10 histograms")
    rng = np.random.default_rng(seed)
    users = sorted(dataset)
    perm = [users[i] for i in rng.permutation(len(users))]
    n_test = max(1, int(round(test_fraction * len(users))))
    test_users, train_users = perm[:n_test], sorted(perm[n_test:])
    model = CfModel({u: dataset[u] for u in train_users}, neighbors, drop_negative)
    rows = []
    for uid in test_users:
        alpha = dataset[uid]
        visited = sorted(_visited(alpha))
        if not visited:
            continue
        loc = visited[int(rng.integers(len(visited)))]
        pred = recommend_score(alpha, loc, model)
        rows.append((uid, loc, float(alpha.get(loc)), float(pred)))
    if not rows:
        raise HistogramError("no test user has a visited location")
    return CfRun(seed, train_users, rows)


def cf_error(dataset: Mapping[str, Histogram], seed: int, error_kind: str = MAE,
             neighbors: int = 25) -> float:
    run = cf_run(dataset, seed, neighbors)
    if error_kind == MAE:
        return run.mae
    if error_kind == RMSE:
        return run.rmse
    raise HistogramError(f"error kind must be {MAE!r} or {RMSE!r}")
