"""Parameter sweeps over histogram datasets, written as long-format CSV."""

from __future__ import annotations

import csv
import itertools
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .evaluation import histogram_nce
from .histogram import BinDistance, Histogram, InfeasibleError, uniform_target
from .ingest import load_dataset
from .slh import SlhInstance, lho_solve, proportional_baseline
from .tr import TrInstance, ah_solve, ao_solve, rh_solve, ro_solve

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

COLUMNS = ("dataset", "user_id", "solver", "n", "N", "K", "sensitive_count",
           "epsilon", "d_q", "d_p", "nce", "runtime_ms")

SLH_SOLVERS = {"lho": lho_solve, "proportional": proportional_baseline}
TR_SOLVERS = {"ro": ro_solve, "rh": rh_solve, "ao": ao_solve, "ah": ah_solve}

# default experiment parameters per dataset
DEFAULT_GRIDS = {
    "NYC": {"n": 25, "K": 20, "sensitive_count": 5, "epsilon": 5e-3, "N": 100},
    "TKY": {"n": 35, "K": 20, "sensitive_count": 5, "epsilon": 5e-3, "N": 100},
}

GRID_KEYS = ("n", "N", "K", "sensitive_count", "epsilon")


@dataclass
class SweepConfig:
    """``grid`` maps n, N, K, sensitive_count, epsilon to value lists.

    ``n`` and ``N`` select histograms of that length/size (missing = any).
    ``K`` makes sensitive sets be resampled until their total equals K.
    """

    datasets: dict[str, Mapping[str, Histogram]]
    grid: dict[str, list] = field(default_factory=dict)
    solvers: tuple[str, ...] = ("lho", "ro", "rh")
    seed: int = 0
    max_histograms: int | None = None
    distance: str = "js"
    nce_k: int = 3
    max_tries: int = 1000

    @classmethod
    def from_toml(cls, path, overrides: Mapping | None = None) -> "SweepConfig":
        path = Path(path)
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
        datasets = {}
        for entry in raw.get("datasets", []):
            p = Path(entry["path"])
            if not p.is_absolute():
                p = path.parent / p
            datasets[entry.get("name", p.name)] = load_dataset(p).histograms
        grid = dict(raw.get("grid", {}))
        preset = raw.get("defaults")
        if preset:
            for key, value in DEFAULT_GRIDS[preset].items():
                grid.setdefault(key, [value])
        unknown = set(grid) - set(GRID_KEYS)
        if unknown:
            raise ValueError(f"unknown grid keys: {sorted(unknown)}")
        return cls(
            datasets=datasets,
            grid={k: list(v) for k, v in grid.items()},
            solvers=tuple(raw.get("solvers", cls.solvers)),
            seed=int(raw.get("seed", 0)),
            max_histograms=raw.get("max_histograms"),
            distance=raw.get("distance", "js"),
            nce_k=int(raw.get("nce_k", 3)),
        )


def _axis(grid, key):
    return grid[key] if key in grid else [None]


def _pick_sensitive(h: Histogram, count, K, rng, max_tries):
    visited = [i for i, c in enumerate(h.counts) if c > 0]
    if count is None or count > len(visited) or count >= h.n:
        return None
    for _ in range(max_tries if K is not None else 1):
        idx = rng.choice(len(visited), size=count, replace=False)
        chosen = [visited[i] for i in idx]
        if K is None or sum(h.counts[i] for i in chosen) == K:
            return frozenset(h.vocabulary[i] for i in chosen)
    return None


def run_sweep(cfg: SweepConfig) -> list[dict]:
    """All result rows; deterministic given the config apart from runtimes."""
    if any(len(v) == 0 for v in cfg.grid.values()):
        return []
    unknown = set(cfg.solvers) - set(SLH_SOLVERS) - set(TR_SOLVERS)
    if unknown:
        raise ValueError(f"unknown solvers: {sorted(unknown)}")
    rng = np.random.default_rng(cfg.seed)
    dist = BinDistance(cfg.distance)
    rows = []
    for name in sorted(cfg.datasets):
        hists = cfg.datasets[name]
        lengths, sizes = _axis(cfg.grid, "n"), _axis(cfg.grid, "N")
        chosen = [u for u in sorted(hists)
                  if (lengths == [None] or hists[u].n in lengths)
                  and (sizes == [None] or hists[u].size in sizes)]
        if cfg.max_histograms is not None:
            chosen = chosen[: cfg.max_histograms]
        for uid in chosen:
            h = hists[uid]
            base = {"dataset": name, "user_id": uid, "n": h.n, "N": h.size}
            slh = [s for s in cfg.solvers if s in SLH_SOLVERS]
            tr = [s for s in cfg.solvers if s in TR_SOLVERS]
            if slh:
                for count, K in itertools.product(_axis(cfg.grid, "sensitive_count"),
                                                  _axis(cfg.grid, "K")):
                    sens = _pick_sensitive(h, count, K, rng, cfg.max_tries)
                    if sens is None:
                        log.info("no sensitive set for %s/%s (count=%s, K=%s)", name, uid, count, K)
                        continue
                    inst = SlhInstance(h, sens, dist)
                    for s in slh:
                        rows.append(_row(base, s, SLH_SOLVERS[s], inst, cfg,
                                         K=inst.K, sensitive_count=len(sens)))
            for eps in (_axis(cfg.grid, "epsilon") if tr else []):
                if eps is None:
                    continue
                inst = TrInstance(h, uniform_target(h), float(eps), privacy=dist, quality=dist)
                for s in tr:
                    rows.append(_row(base, s, TR_SOLVERS[s], inst, cfg, epsilon=eps))
    return rows


def _row(base, solver, fn, inst, cfg, **extra):
    row = dict.fromkeys(COLUMNS, "")
    row.update(base)
    row["solver"] = solver
    row.update(extra)
    t0 = time.perf_counter()
    try:
        rep = fn(inst)
    except InfeasibleError:
        row["runtime_ms"] = (time.perf_counter() - t0) * 1e3
        row["d_q"] = "infeasible"
        return row
    row["runtime_ms"] = (time.perf_counter() - t0) * 1e3
    row["d_q"] = rep.d_q
    row["d_p"] = "" if rep.d_p is None else rep.d_p
    row["nce"] = histogram_nce(inst.histogram, rep.histogram, cfg.nce_k)
    return row


def write_csv(rows, path_or_file) -> None:
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k, "") for k in COLUMNS})
    finally:
        if own:
            fh.close()
