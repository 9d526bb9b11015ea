"""Hiding sensitive locations.

A user's histogram counts visits per location. Some locations are
sensitive (a clinic, a place of worship), so the released histogram must
show zero visits there. The hidden visits are not simply dropped: they are
spread over the remaining locations so that the released histogram stays as
close as possible to the true one, measured by Jensen-Shannon divergence.

Run from the repository root:  python demos/01_hiding_sensitive_locations.py
"""

from histosan import BinDistance, Histogram, SlhInstance, Taxonomy, expand_sensitive
from histosan import lho_solve, proportional_baseline, slh_r_solve
from histosan.histogram import InfeasibleError
from histosan.slh import lho_edge_weights

# %% A user who visited eight places fifty times in total
H = Histogram((7, 2, 3, 2, 13, 12, 8, 3),
              ("cafe", "gym", "bar", "deli", "office", "park", "clinic", "church"))
print("original :", dict(zip(H.vocabulary, H.counts)))

# %% Sensitive places can be listed directly or picked from a category tree
tax = Taxonomy.from_json({
    "name": "all",
    "children": [
        {"name": "private", "children": [
            {"name": "clinic", "location_id": "clinic"},
            {"name": "church", "location_id": "church"},
        ]},
        *({"name": v, "location_id": v} for v in H.vocabulary[:6]),
    ],
})
sensitive = expand_sensitive(tax, {"private"})
print("sensitive:", sorted(sensitive))

# %% The optimal redistribution is a cheapest path through a layered graph:
# layer i holds "counts added so far", and the edge that adds k counts to
# location i costs that location's share of the divergence.
inst = SlhInstance(H, sensitive)
rep = lho_solve(inst)
print("released :", dict(zip(H.vocabulary, rep.counts)))
print(f"d_q      : {rep.d_q:.6f}  ({rep.telemetry['wall_time_ms']:.2f} ms)")

E = lho_edge_weights(7, inst.K, BinDistance("js").bind(H.size))
print(f"cost of adding 2 visits to the cafe: {E[2]:.2e}")

# %% The obvious alternative scales every remaining count up in proportion.
# Here 7 * 11 / 39 is not a whole number, so it cannot even be applied.
try:
    proportional_baseline(inst)
except InfeasibleError as exc:
    print("proportional:", exc)

# %% Releasing a histogram of a different size is also possible: add r
# visits instead of the 11 that were hidden.
for r in (0, 5, 11, 20):
    out = slh_r_solve(inst, r)
    print(f"r={r:2d}: size {sum(out.counts):2d}, d_q {out.d_q:.4f}, counts {out.counts}")
