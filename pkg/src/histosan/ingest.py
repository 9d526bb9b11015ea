"""Check-in corpora to per-user histograms, plus synthetic and sampling helpers."""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .histogram import Histogram, HistogramError

log = logging.getLogger(__name__)

# Foursquare NYC/TKY TSV: user, venue, category id, category name, lat, lon,
# timezone offset, UTC time
FOURSQUARE_COLUMNS = {"user_id": 0, "category_id": 2, "category_name": 3, "timestamp": 7}


@dataclass(frozen=True)
class CheckinRecord:
    user_id: str
    category_id: str
    category_name: str = ""
    timestamp: str = ""


@dataclass
class HistogramDataset:
    """One histogram per user over the locations that user visited."""

    histograms: dict[str, Histogram] = field(default_factory=dict)
    category_names: dict[str, str] = field(default_factory=dict)
    malformed: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.histograms)

    def __iter__(self):
        return iter(sorted(self.histograms))

    def __getitem__(self, user_id: str) -> Histogram:
        return self.histograms[user_id]

    @property
    def vocabulary(self) -> tuple[str, ...]:
        locs = set()
        for h in self.histograms.values():
            locs.update(h.vocabulary)
        return tuple(sorted(locs))

    def statistics(self) -> dict:
        """Histogram count, mean/max length and mean size."""
        lengths = [h.n for h in self.histograms.values()]
        sizes = [h.size for h in self.histograms.values()]
        return {
            "histograms": len(lengths),
            "mean_length": float(np.mean(lengths)) if lengths else 0.0,
            "max_length": int(max(lengths)) if lengths else 0,
            "mean_size": float(np.mean(sizes)) if sizes else 0.0,
            "locations": len(self.vocabulary),
            "malformed_lines": len(self.malformed),
        }


def parse_record(line: str | bytes, columns: Mapping[str, int] = FOURSQUARE_COLUMNS,
                 delimiter: str = "\t") -> CheckinRecord:
    if isinstance(line, bytes):
        line = line.decode("utf-8")
    parts = line.rstrip("\r\n").split(delimiter)
    try:
        user = parts[columns["user_id"]].strip()
        cat = parts[columns["category_id"]].strip()
    except IndexError:
        raise HistogramError("too few columns") from None
    if not user or not cat:
        raise HistogramError("empty user or category")
    name = parts[columns["category_name"]] if columns.get("category_name", -1) in range(len(parts)) else ""
    ts = parts[columns["timestamp"]] if columns.get("timestamp", -1) in range(len(parts)) else ""
    return CheckinRecord(user, cat, name, ts)


def parse_checkins(lines: Iterable[str | bytes], columns: Mapping[str, int] = FOURSQUARE_COLUMNS,
                   delimiter: str = "\t", strict: bool = False) -> HistogramDataset:
    """Count visits per (user, location category).

    Malformed or undecodable lines are skipped and their 1-based line
    numbers recorded; with ``strict`` the first one raises. Blank lines are
    ignored.
    """
    counts: dict[str, Counter] = defaultdict(Counter)
    names: dict[str, str] = {}
    bad: list[int] = []
    for lineno, line in enumerate(lines, start=1):
        if not (line.strip() if isinstance(line, (str, bytes)) else line):
            continue
        try:
            rec = parse_record(line, columns, delimiter)
        except (HistogramError, UnicodeDecodeError) as exc:
            if strict:
                raise HistogramError(f"line {lineno}: {exc}") from None
            bad.append(lineno)
            continue
        counts[rec.user_id][rec.category_id] += 1
        if rec.category_name:
            names.setdefault(rec.category_id, rec.category_name)
    if bad:
        log.warning("skipped %d malformed check-in lines", len(bad))
    hists = {}
    for user, ctr in counts.items():
        locs = sorted(ctr)
        hists[user] = Histogram(tuple(ctr[l] for l in locs), tuple(locs))
    return HistogramDataset(hists, names, bad)


def load_checkins(path, **kwargs) -> HistogramDataset:
    with open(path, "rb") as fh:
        return parse_checkins(fh, **kwargs)


def _safe_name(user_id: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in user_id)


def save_dataset(ds: HistogramDataset, directory) -> Path:
    """One ``<user>.json`` per histogram plus ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {}
    for uid in sorted(ds.histograms):
        name = f"{_safe_name(uid)}.json"
        (directory / name).write_text(json.dumps(ds.histograms[uid].to_json()))
        files[uid] = name
    manifest = {"statistics": ds.statistics(), "users": files,
                "category_names": ds.category_names}
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path


def load_dataset(directory) -> HistogramDataset:
    """Read a dataset directory (manifest optional: all ``*.json`` are users)."""
    directory = Path(directory)
    manifest = directory / "manifest.json"
    if manifest.exists():
        meta = json.loads(manifest.read_text())
        files = meta["users"]
        names = meta.get("category_names", {})
    else:
        files = {p.stem: p.name for p in sorted(directory.glob("*.json"))}
        names = {}
    hists = {uid: Histogram.from_json(json.loads((directory / f).read_text()))
             for uid, f in files.items()}
    return HistogramDataset(hists, names)


def gen_synthetic(base: Histogram, target_length: int, prefix: str = "synthetic_") -> Histogram:
    """Append zero-count bins with fresh location ids up to ``target_length``."""
    if target_length < base.n:
        raise HistogramError(f"target length {target_length} is below the base length {base.n}")
    taken = set(base.vocabulary)
    extra = []
    i = 0
    while len(extra) < target_length - base.n:
        name = f"{prefix}{i}"
        if name not in taken:
            extra.append(name)
        i += 1
    return Histogram(base.counts + (0,) * len(extra), base.vocabulary + tuple(extra))


def pick_sensitive(dataset: Mapping[str, Histogram] | HistogramDataset, count: int,
                   seed: int) -> dict[str, frozenset[str]]:
    """Choose ``count`` visited locations per user uniformly without replacement."""
    hists = dataset.histograms if isinstance(dataset, HistogramDataset) else dataset
    rng = np.random.default_rng(seed)
    out = {}
    for uid in sorted(hists):
        h = hists[uid]
        visited = [v for v, c in zip(h.vocabulary, h.counts) if c > 0]
        if count > len(visited):
            raise HistogramError(f"user {uid} visited {len(visited)} locations, asked for {count}")
        pick = rng.choice(len(visited), size=count, replace=False) if count else []
        out[uid] = frozenset(visited[i] for i in pick)
    return out
