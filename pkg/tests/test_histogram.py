import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from histosan import (
    BinDistance,
    Histogram,
    HistogramError,
    TargetHistogram,
    Taxonomy,
    align,
    distance,
    expand_sensitive,
    js_term,
    uniform_target,
)
from histosan.histogram import js_terms

from conftest import BASE_COUNTS, LOCS, js_reference

JS = BinDistance("js")
L2 = BinDistance("l2")

counts = st.lists(st.integers(0, 40), min_size=1, max_size=8)


def _pair(draw_lists):
    a, b = draw_lists
    m = min(len(a), len(b))
    return a[:m], b[:m]


# --- construction ----------------------------------------------------------

def test_default_vocabulary_and_sizes():
    h = Histogram((3, 0, 2))
    assert h.vocabulary == ("0", "1", "2")
    assert (h.n, h.size) == (3, 5)


@pytest.mark.parametrize("bad", [(-1, 2), (1.5, 2)])
def test_rejects_bad_counts(bad):
    with pytest.raises(HistogramError):
        Histogram(bad)


def test_rejects_duplicate_vocabulary():
    with pytest.raises(HistogramError):
        Histogram((1, 2), ("a", "a"))


def test_json_round_trip(base_hist):
    again = Histogram.from_json(json.loads(json.dumps(base_hist.to_json())))
    assert again == base_hist
    t = TargetHistogram((1.5, 2.5), ("x", "y"))
    assert TargetHistogram.from_json(t.to_json()) == t


def test_target_from_distribution():
    t = TargetHistogram.from_distribution({"a": 0.25, "b": 0.75}, 8)
    assert t.counts == (2.0, 6.0)
    with pytest.raises(HistogramError):
        TargetHistogram.from_distribution({"a": 0.5, "b": 0.6}, 8)


def test_uniform_target(base_hist):
    t = uniform_target(base_hist)
    assert t.counts == (50 / 8,) * 8 and t.vocabulary == LOCS


def test_align_zero_fills_union():
    a = Histogram((1, 2), ("x", "z"))
    b = Histogram((5,), ("y",))
    a2, b2 = align(a, b)
    assert a2.vocabulary == b2.vocabulary == ("x", "y", "z")
    assert a2.counts == (1, 0, 2) and b2.counts == (0, 5, 0)


# --- JS divergence ---------------------------------------------------------

def test_js_golden_hiding_case():
    # frozen value of the direct formula on the hiding example
    d = distance(JS, BASE_COUNTS, (9, 3, 4, 3, 16, 15, 0, 0))
    assert d == pytest.approx(0.12039920432100201, abs=1e-12)
    assert d == pytest.approx(js_reference(BASE_COUNTS, (9, 3, 4, 3, 16, 15, 0, 0)), abs=1e-12)


def test_js_zero_conventions():
    assert js_term(0, 0, 10) == 0.0
    # one empty side: a*log2(2) / 2N
    assert js_term(4, 0, 10) == pytest.approx(4 / 20)
    assert js_term(0, 4, 10) == pytest.approx(4 / 20)


def test_js_term_rejects_negatives():
    with pytest.raises(HistogramError):
        js_term(-1, 2, 10)
    with pytest.raises(HistogramError):
        JS.bind(5).terms([1, -2], [1, 1])


def test_unbound_js_refuses_terms():
    with pytest.raises(HistogramError):
        JS.terms([1], [2])


@settings(max_examples=200, deadline=None)
@given(st.tuples(counts, counts))
def test_js_matches_reference(pair):
    a, b = _pair(pair)
    if sum(a) == 0:
        return
    assert distance(JS, a, b) == pytest.approx(js_reference(a, b), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.tuples(counts, counts))
def test_js_symmetric_and_bounded(pair):
    a, b = _pair(pair)
    N = max(sum(a), sum(b), 1)
    d = JS.bind(N)
    ab = float(np.sum(d.terms(a, b)))
    ba = float(np.sum(d.terms(b, a)))
    assert ab == pytest.approx(ba, abs=1e-12)
    # each bin is at most (a + b) / 2N, so the sum is at most (|a| + |b|) / 2N
    assert 0.0 <= ab <= (sum(a) + sum(b)) / (2 * N) + 1e-12
    if a == b:
        assert ab == 0.0


def test_js_identical_distributions_is_zero(base_hist):
    assert distance(JS, base_hist, base_hist) == 0.0


def test_js_vectorized_matches_scalar():
    rng = np.random.default_rng(7)
    a = rng.integers(0, 30, 200)
    b = rng.integers(0, 30, 200)
    vec = js_terms(a, b, 50)
    for x, y, v in zip(a, b, vec):
        assert v == pytest.approx(js_reference([x], [y], 50), abs=1e-15)


# --- L2 and squared Euclidean ----------------------------------------------

def test_l2_three_four_five():
    assert distance(L2, (3, 4), (0, 0)) == pytest.approx(5.0)
    assert distance(BinDistance("sqeuclid"), (3, 4), (0, 0)) == pytest.approx(25.0)


def test_l2_budget_is_squared():
    assert L2.budget(0.5) == 0.25
    assert JS.budget(0.5) == 0.5


def test_decomposability():
    """Summing per-bin terms reproduces the distance for every kind."""
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        a = rng.integers(0, 20, n)
        b = rng.integers(0, 20, n)
        if a.sum() == 0:
            a[0] = 1
        for kind in ("js", "l2", "sqeuclid"):
            d = BinDistance(kind).bind(float(a.sum()))
            per_bin = math.fsum(d.term(x, y) for x, y in zip(a, b))
            assert float(d.finalize(per_bin)) == pytest.approx(distance(BinDistance(kind), a, b),
                                                              rel=1e-12, abs=1e-15)


def test_unknown_kind():
    with pytest.raises(HistogramError):
        BinDistance("cosine")


def test_distance_shape_mismatch():
    with pytest.raises(HistogramError):
        distance(JS, (1, 2), (1, 2, 3))


# --- taxonomy --------------------------------------------------------------

TAXONOMY = {
    "name": "root",
    "children": [
        {"name": "Medical center", "children": [
            {"name": "Hospital", "location_id": "Hospital"},
            {"name": "Rehab center", "location_id": "Rehab center"},
        ]},
        {"name": "Food", "children": [
            {"name": "Cafe", "location_id": "Cafe"},
            {"name": "Diner", "location_id": "Diner"},
        ]},
        {"name": "Gym", "location_id": "Gym"},
    ],
}


@pytest.fixture
def tax():
    return Taxonomy.from_json(TAXONOMY)


def test_leaf_selects_itself(tax):
    assert expand_sensitive(tax, {"Hospital"}) == {"Hospital"}


def test_internal_node_selects_leaves(tax):
    assert expand_sensitive(tax, {"Medical center"}) == {"Hospital", "Rehab center"}


def test_root_selects_everything(tax):
    assert expand_sensitive(tax, {"root"}) == set(tax.locations)


def test_empty_selection(tax):
    assert expand_sensitive(tax, set()) == frozenset()


def test_expansion_is_monotone(tax):
    nodes = ["root", "Medical center", "Food", "Hospital", "Cafe", "Gym"]
    for i, a in enumerate(nodes):
        for b in nodes[i:]:
            assert expand_sensitive(tax, {a}) <= expand_sensitive(tax, {a, b})


def test_unknown_node(tax):
    with pytest.raises(KeyError):
        expand_sensitive(tax, {"Airport"})


def test_taxonomy_round_trip(tax):
    assert Taxonomy.from_json(tax.to_json()).locations == tax.locations


def test_leaf_without_location_id():
    with pytest.raises(HistogramError):
        Taxonomy.from_json({"name": "root", "children": [{"name": "orphan"}]})
