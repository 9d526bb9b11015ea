"""Location histograms, taxonomies and per-bin decomposable distances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class HistogramError(ValueError):
    """Structurally invalid histogram, vocabulary or distance input."""


class InfeasibleError(ValueError):
    """The requested sanitization has no admissible solution."""


def _as_vocabulary(vocabulary: Iterable, n: int) -> tuple[str, ...]:
    vocab = tuple(str(v) for v in vocabulary)
    if len(vocab) != n:
        raise HistogramError(f"vocabulary has {len(vocab)} entries, counts has {n}")
    if len(set(vocab)) != n:
        raise HistogramError("vocabulary entries must be unique")
    return vocab


@dataclass(frozen=True)
class Histogram:
    """Integer visit counts over an ordered location vocabulary.

    If no vocabulary is given, bins are named ``"0"``, ``"1"``, ...
    """

    counts: tuple[int, ...]
    vocabulary: tuple[str, ...] = ()

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c != c0 for c, c0 in zip(counts, self.counts)):
            raise HistogramError("histogram counts must be integers")
        if not counts:
            raise HistogramError("histogram must have at least one bin")
        if any(c < 0 for c in counts):
            raise HistogramError("histogram counts must be nonnegative")
        vocab = self.vocabulary or tuple(str(i) for i in range(len(counts)))
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "vocabulary", _as_vocabulary(vocab, len(counts)))

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> int:
        return sum(self.counts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    def index(self, location: str) -> int:
        try:
            return self.vocabulary.index(location)
        except ValueError:
            raise HistogramError(f"unknown location {location!r}") from None

    def get(self, location: str, default: int = 0) -> int:
        if location in self.vocabulary:
            return self.counts[self.vocabulary.index(location)]
        return default

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.vocabulary, self.counts))

    def with_counts(self, counts: Sequence[int]) -> "Histogram":
        return Histogram(tuple(int(c) for c in counts), self.vocabulary)

    @classmethod
    def from_dict(cls, mapping: Mapping[str, int]) -> "Histogram":
        return cls(tuple(mapping.values()), tuple(mapping.keys()))

    def to_json(self) -> dict:
        return {"vocabulary": list(self.vocabulary), "counts": list(self.counts)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Histogram":
        try:
            return cls(tuple(obj["counts"]), tuple(obj["vocabulary"]))
        except (KeyError, TypeError) as exc:
            raise HistogramError(f"bad histogram JSON: {exc}") from None


@dataclass(frozen=True)
class TargetHistogram:
    """Real-valued target counts, e.g. ``N * h''`` for a target distribution."""

    counts: tuple[float, ...]
    vocabulary: tuple[str, ...] = ()

    def __post_init__(self):
        counts = tuple(float(c) for c in self.counts)
        if not counts:
            raise HistogramError("target histogram must have at least one bin")
        if any(c < 0 or not math.isfinite(c) for c in counts):
            raise HistogramError("target counts must be finite and nonnegative")
        vocab = self.vocabulary or tuple(str(i) for i in range(len(counts)))
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "vocabulary", _as_vocabulary(vocab, len(counts)))

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> float:
        return math.fsum(self.counts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64)

    def get(self, location: str, default: float = 0.0) -> float:
        if location in self.vocabulary:
            return self.counts[self.vocabulary.index(location)]
        return default

    @classmethod
    def from_histogram(cls, h: Histogram) -> "TargetHistogram":
        return cls(tuple(float(c) for c in h.counts), h.vocabulary)

    @classmethod
    def from_distribution(cls, distribution: Mapping[str, float], size: float,
                          tol: float = 1e-9) -> "TargetHistogram":
        """Scale a probability distribution over locations to ``size`` counts."""
        total = math.fsum(distribution.values())
        if any(p < 0 for p in distribution.values()) or abs(total - 1.0) > tol:
            raise HistogramError(f"target distribution must sum to 1, got {total!r}")
        return cls(tuple(size * p for p in distribution.values()), tuple(distribution))

    def to_json(self) -> dict:
        return {"vocabulary": list(self.vocabulary), "counts": list(self.counts)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "TargetHistogram":
        try:
            return cls(tuple(obj["counts"]), tuple(obj["vocabulary"]))
        except (KeyError, TypeError) as exc:
            raise HistogramError(f"bad histogram JSON: {exc}") from None


def uniform_target(h: Histogram) -> TargetHistogram:
    """Target with the same length and size as ``h`` and every count ``N/n``."""
    return TargetHistogram((h.size / h.n,) * h.n, h.vocabulary)


def align(a, b):
    """Expand two histograms onto a common vocabulary, zero-filling new bins.

    Identical vocabularies are returned unchanged. Otherwise the union is
    taken in lexicographic order.
    """
    if a.vocabulary == b.vocabulary:
        return a, b
    vocab = tuple(sorted(set(a.vocabulary) | set(b.vocabulary)))

    def expand(h):
        return type(h)(tuple(h.get(v, 0) for v in vocab), vocab)

    return expand(a), expand(b)


# ---------------------------------------------------------------------------
# distances

JS = "js"
L2 = "l2"
SQEUCLID = "sqeuclid"
KINDS = (JS, L2, SQEUCLID)


@dataclass(frozen=True)
class BinDistance:
    """A distance that is a (monotone transform of a) sum of per-bin terms.

    JS and squared Euclidean are plain sums of ``term``. For ``l2`` the
    per-bin term is the squared difference and the distance is the square
    root of the sum, so optimizing the sum optimizes the distance.

    ``normalizer`` is the size N in the JS ``1/(2N)`` factor. Solvers bind an
    unset normalizer to the size of the user histogram.
    """

    kind: str = JS
    normalizer: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise HistogramError(f"unknown distance kind {self.kind!r}; expected one of {KINDS}")
        if self.normalizer is not None and not self.normalizer > 0:
            raise HistogramError("distance normalizer must be positive")

    def bind(self, size: float) -> "BinDistance":
        if self.kind != JS or self.normalizer is not None:
            return self
        if size <= 0:
            raise HistogramError("JS divergence needs a positive histogram size")
        return BinDistance(self.kind, float(size))

    def terms(self, a, b) -> np.ndarray:
        """Per-bin terms, vectorized over broadcastable ``a`` and ``b``."""
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if np.any(a < 0) or np.any(b < 0):
            raise HistogramError("distance arguments must be nonnegative")
        if self.kind == JS:
            if self.normalizer is None:
                raise HistogramError("JS distance has no normalizer; call bind(N) first")
            return js_terms(a, b, self.normalizer)
        return (a - b) ** 2

    def term(self, a: float, b: float) -> float:
        return float(self.terms(a, b))

    def finalize(self, total):
        """Map a sum of terms to the distance value."""
        if self.kind == L2:
            return np.sqrt(np.maximum(total, 0.0))
        return total

    def budget(self, eps: float) -> float:
        """Map a bound on the distance to a bound on the sum of terms."""
        return eps * eps if self.kind == L2 else eps

    def __call__(self, x, y) -> float:
        return distance(self, x, y)

    def to_json(self) -> dict:
        return {"kind": self.kind, "normalizer": self.normalizer}


def js_terms(a, b, N: float) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    s = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(a > 0, a * np.log2(np.where(a > 0, 2.0 * a / s, 1.0)), 0.0)
        tb = np.where(b > 0, b * np.log2(np.where(b > 0, 2.0 * b / s, 1.0)), 0.0)
    # rounding can leave -1e-17 where a ~ b
    return np.maximum((ta + tb) / (2.0 * N), 0.0)


def js_term(a: float, b: float, N: float) -> float:
    """One bin of the Jensen-Shannon divergence between count histograms.

    Uses base-2 logs, ``0*log2(0) = 0`` and the ``1/(2N)`` size normalizer.
    """
    if a < 0 or b < 0:
        raise HistogramError("js_term arguments must be nonnegative")
    if not N > 0:
        raise HistogramError("js_term normalizer must be positive")
    return float(js_terms(a, b, N))


def _counts(x) -> np.ndarray:
    if isinstance(x, (Histogram, TargetHistogram)):
        return x.as_array().astype(np.float64)
    return np.asarray(x, dtype=np.float64)


def distance(d: BinDistance, x, y) -> float:
    """Distance between two aligned histograms (or plain count sequences).

    An unbound JS distance is normalized by the size of ``x``.
    """
    if isinstance(x, (Histogram, TargetHistogram)) and isinstance(y, (Histogram, TargetHistogram)):
        x, y = align(x, y)
    a, b = _counts(x), _counts(y)
    if a.shape != b.shape or a.ndim != 1:
        raise HistogramError(f"cannot compare histograms of shapes {a.shape} and {b.shape}")
    d = d.bind(float(a.sum()))
    return float(d.finalize(float(np.sum(d.terms(a, b)))))


# ---------------------------------------------------------------------------
# taxonomy

@dataclass(frozen=True)
class TaxonomyNode:
    name: str
    children: tuple["TaxonomyNode", ...] = ()
    location_id: str | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self):
        if self.is_leaf:
            yield self
        for child in self.children:
            yield from child.leaves()

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class Taxonomy:
    """Rooted tree of location categories whose leaves are locations."""

    root: TaxonomyNode
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index: dict[str, TaxonomyNode] = {}
        for node in self.root.walk():
            if node.is_leaf and not node.location_id:
                raise HistogramError(f"taxonomy leaf {node.name!r} has no location_id")
            for key in {node.name, node.location_id} - {None}:
                if key in index and index[key] is not node:
                    raise HistogramError(f"duplicate taxonomy identifier {key!r}")
                index[key] = node
        object.__setattr__(self, "_index", index)

    def node(self, ident: str) -> TaxonomyNode:
        try:
            return self._index[ident]
        except KeyError:
            raise KeyError(f"unknown taxonomy node {ident!r}") from None

    @property
    def locations(self) -> tuple[str, ...]:
        return tuple(leaf.location_id for leaf in self.root.leaves())

    @classmethod
    def from_json(cls, obj: Mapping) -> "Taxonomy":
        def build(o, seen):
            if id(o) in seen:
                raise HistogramError("taxonomy contains a cycle")
            seen = seen | {id(o)}
            if "name" not in o:
                raise HistogramError("taxonomy node without a name")
            children = tuple(build(c, seen) for c in o.get("children", ()))
            return TaxonomyNode(str(o["name"]), children, o.get("location_id"))

        return cls(build(obj, frozenset()))

    def to_json(self) -> dict:
        def dump(node):
            out = {"name": node.name}
            if node.location_id is not None:
                out["location_id"] = node.location_id
            if node.children:
                out["children"] = [dump(c) for c in node.children]
            return out

        return dump(self.root)


def expand_sensitive(taxonomy: Taxonomy, selected: Iterable[str]) -> frozenset[str]:
    """Locations under the selected taxonomy nodes (a leaf selects itself)."""
    out: set[str] = set()
    for ident in selected:
        out.update(leaf.location_id for leaf in taxonomy.node(ident).leaves())
    return frozenset(out)


# ---------------------------------------------------------------------------
# JSON files

def read_json(path) -> object:
    with open(Path(path), encoding="utf-8") as fh:
        return json.load(fh)


def load_histogram(path) -> Histogram:
    return Histogram.from_json(read_json(path))


def load_taxonomy(path) -> Taxonomy:
    return Taxonomy.from_json(read_json(path))
