"""Shared fixtures and independent reference formulas."""

import math

import numpy as np
import pytest

from histosan import BinDistance, Histogram, SlhInstance, TargetHistogram, TrInstance

LOCS = tuple("abcdefgh")
BASE_COUNTS = (7, 2, 3, 2, 13, 12, 8, 3)
BASE_TARGET = (10, 8, 6, 2, 13, 4, 4, 3)


def js_reference(x, y, N=None):
    """Scalar JS divergence straight from the definition, for cross-checks."""
    N = sum(x) if N is None else N
    total = []
    for a, b in zip(x, y):
        s = 0.0
        if a:
            s += a * math.log2(2 * a / (a + b))
        if b:
            s += b * math.log2(2 * b / (a + b))
        total.append(s / (2 * N))
    return math.fsum(total)


@pytest.fixture
def base_hist():
    return Histogram(BASE_COUNTS, LOCS)


@pytest.fixture
def hiding_case(base_hist):
    return SlhInstance(base_hist, frozenset({"g", "h"}))


@pytest.fixture
def resemble_case(base_hist):
    return TrInstance(base_hist, TargetHistogram(BASE_TARGET, LOCS), 0.05)


def random_histogram(rng, n, N, visited_only=False):
    if visited_only:
        counts = 1 + rng.multinomial(N - n, np.ones(n) / n)
    else:
        counts = rng.multinomial(N, rng.dirichlet(np.ones(n)))
    return Histogram(tuple(int(c) for c in counts))


def random_target(rng, n, N):
    raw = rng.dirichlet(np.ones(n)) * N
    # some integer targets produce exact ties, which the tie-breaks must handle
    if rng.random() < 0.5:
        raw = np.round(raw)
    return TargetHistogram(tuple(float(v) for v in raw))


def random_distance(rng):
    return BinDistance(["js", "l2", "sqeuclid"][int(rng.integers(3))])


# --- acceptance summary ------------------------------------------------------------

ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])
