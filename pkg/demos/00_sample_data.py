"""Build the small check-in corpus used by the other demos and the sweep config.

The public NYC/TKY corpora are large and not redistributed here, so this
script writes a synthetic stand-in in the same tab-separated layout: user
id, venue id, category id, category name, latitude, longitude, timezone
offset, UTC time. Visits follow a heavy-tailed popularity curve, and most
users have 25 distinct categories and 100 check-ins (the default sweep
setting), so the default grid has something to run on.

Run from the repository root:  python demos/00_sample_data.py
"""

from pathlib import Path

import numpy as np

from histosan.ingest import load_checkins, save_dataset

ROOT = Path(__file__).resolve().parent.parent
OUT_TSV = ROOT / "data" / "sample_checkins.tsv"
OUT_DIR = ROOT / "data" / "sample"

CATEGORIES = [
    "Coffee Shop", "Office", "Gym", "Bar", "Subway", "Park", "Deli", "Bookstore",
    "Hospital", "Rehab Center", "Pharmacy", "Church", "Mosque", "Synagogue",
    "Bakery", "Pizza Place", "Sushi Restaurant", "Museum", "Movie Theater",
    "Train Station", "Airport", "Hotel", "Library", "University", "High School",
    "Grocery Store", "Clothing Store", "Electronics Store", "Nightclub", "Diner",
    "Bus Station", "Beach", "Stadium", "Concert Hall", "Art Gallery", "Salon",
    "Laundromat", "Bank", "Post Office", "Courthouse",
]


def user_counts(rng, n, N):
    # everyone visits n categories at least once; the rest follow a Zipf curve
    cats = rng.choice(len(CATEGORIES), size=n, replace=False)
    weights = 1.0 / np.arange(1, n + 1)
    extra = rng.multinomial(N - n, weights / weights.sum())
    return {int(c): 1 + int(e) for c, e in zip(cats, extra)}


def main(seed=7, users=30):
    rng = np.random.default_rng(seed)
    lines = []
    for u in range(users):
        n, N = (25, 100) if u % 3 else (int(rng.integers(10, 36)), int(rng.integers(60, 220)))
        for cat, count in sorted(user_counts(rng, n, N).items()):
            for _ in range(count):
                day = int(rng.integers(1, 29))
                lines.append("\t".join([
                    f"user{u:03d}", f"venue{cat:03d}{int(rng.integers(100)):02d}",
                    f"cat{cat:03d}", CATEGORIES[cat], "40.73", "-73.99", "-240",
                    f"Tue Apr {day:02d} 18:00:09 +0000 2012",
                ]))
    rng.shuffle(lines)
    OUT_TSV.parent.mkdir(parents=True, exist_ok=True)
    OUT_TSV.write_text("\n".join(lines) + "\n")

    ds = load_checkins(OUT_TSV)
    save_dataset(ds, OUT_DIR)
    print(f"wrote {len(lines)} check-ins for {len(ds)} users to {OUT_TSV.relative_to(ROOT)}")
    for key, value in ds.statistics().items():
        print(f"  {key:>16}: {value}")


if __name__ == "__main__":
    main()
