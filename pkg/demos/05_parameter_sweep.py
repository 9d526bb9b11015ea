"""Running a parameter grid.

A sweep reads a TOML config (datasets, grid of n, N, K, sensitive_count,
epsilon, solvers, seed), runs every solver on every matching histogram and
writes one CSV row per run. The same thing is available on the command line:

    histosan sweep --config configs/defaults.toml --output results.csv

Run `python demos/00_sample_data.py` first, then
python demos/05_parameter_sweep.py
"""

import io
from pathlib import Path

import numpy as np

from histosan.sweep import SweepConfig, run_sweep, write_csv

ROOT = Path(__file__).resolve().parent.parent

cfg = SweepConfig.from_toml(ROOT / "configs" / "defaults.toml")
print("grid:", cfg.grid)
rows = run_sweep(cfg)

buf = io.StringIO()
write_csv(rows, buf)
print(buf.getvalue().splitlines()[0])
print(f"{len(rows)} rows")

# %% Summaries per solver
for solver in cfg.solvers:
    mine = [r for r in rows if r["solver"] == solver and r["d_q"] != "infeasible"]
    if not mine:
        print(f"{solver:>12}: no feasible runs")
        continue
    ms = np.median([r["runtime_ms"] for r in mine])
    dp = [r["d_p"] for r in mine if r["d_p"] != ""]
    extra = f", median d_p {np.median(dp):.4f}" if dp else ""
    print(f"{solver:>12}: {len(mine)} runs, median {ms:.2f} ms{extra}")
