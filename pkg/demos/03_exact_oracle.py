"""Checking the solvers against brute force.

Every candidate release is a way of writing the total count as an ordered
sum over the bins (a weak composition). For small histograms all of them
can be scanned, which gives the exact optimum and every tied optimum, a
ground truth for the graph-based solvers.

Run from the repository root:  python demos/03_exact_oracle.py
"""

import numpy as np

from histosan import Histogram, SlhInstance, TargetHistogram, TrInstance
from histosan import ao_solve, lho_solve, ro_solve
from histosan.oracle import CapExceeded, count_compositions, oracle_slh, oracle_ta, oracle_tr

H = Histogram((7, 2, 3, 2, 13, 12, 8, 3), tuple("abcdefgh"))

# %% Hiding two locations: 11 visits into 6 places
print("candidates:", count_compositions(11, 6))
res = oracle_slh(SlhInstance(H, {"g", "h"}))
print("oracle optimum", round(res.optimum, 6), "ties", res.ties)
print("solver output ", lho_solve(SlhInstance(H, {"g", "h"})).counts)

# %% The full resemblance example is too large to scan
try:
    oracle_tr(TrInstance(H, TargetHistogram((10, 8, 6, 2, 13, 4, 4, 3), tuple("abcdefgh")), 0.05))
except CapExceeded as exc:
    print("resemblance example:", exc)

# %% ... but random small instances are cheap, and the solvers agree
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(100):
    n, N = int(rng.integers(2, 5)), int(rng.integers(1, 9))
    h = Histogram(tuple(int(c) for c in rng.multinomial(N, np.ones(n) / n)))
    t = TargetHistogram(tuple(float(x) for x in rng.dirichlet(np.ones(n)) * N))
    inst = TrInstance(h, t, float(rng.choice([0.01, 0.1, 1.0])))
    worst = max(worst, abs(ro_solve(inst).d_p - oracle_tr(inst).optimum),
                abs(ao_solve(inst).d_p - oracle_ta(inst).optimum))
print(f"largest gap over 100 random instances: {worst:.1e}")
