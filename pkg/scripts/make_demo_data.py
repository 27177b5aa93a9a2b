#!/usr/bin/env python3
"""Generate a self-contained demo city: districts, crimes, posts, cache.

Writes four files into --out (default demo/): districts.geojson,
crimes.csv, posts.ndjson, and a pre-warmed geocache.tsv so the whole
pipeline runs offline with --stub-geocoder. Deterministic for a given
seed. Typical session:

    python scripts/make_demo_data.py --out demo
    vcfat ingest --crimes demo/crimes.csv --posts demo/posts.ndjson \\
        --districts demo/districts.geojson \\
        --stub-geocoder --geocode-cache demo/geocache.tsv --out demo/store
    vcfat build --store demo/store --out demo/snapshot.json
    vcfat serve --snapshot demo/snapshot.json
"""
from __future__ import annotations

import argparse
import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

import sys

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from vcfat.locate import GeocodeCache, normalize_place_text  # noqa: E402

DISTRICT_NAMES = [
    "Mission", "Tenderloin", "Sunset", "Richmond", "Bayview",
    "Marina", "Nob Hill", "Castro", "Chinatown",
]

# Per-district relative crime intensity; posts loosely track it so the
# co-location view has a visible (but not perfect) correlation.
INTENSITY = [9, 8, 3, 2, 7, 2, 5, 4, 6]

CATEGORY_POOL = [
    ("Assault", 5), ("Larceny Theft", 9), ("Robbery", 4), ("Burglary", 4),
    ("Motor Vehicle Theft", 3), ("Arson", 1), ("Fraud", 2),
    ("Traffic Violation Arrest", 3), ("Vandalism", 2),
]

POST_TEMPLATES = [
    ("Someone got mugged near {place} last night, be careful", "robbery"),
    ("Car stolen on my block in {place}!!", "motor-vehicle-theft"),
    ("{place} corner store got robbed again", "robbery"),
    ("Saw a fight, guy got attacked outside the bar in {place}", "assault"),
    ("My bike was stolen in {place} today", "theft"),
    ("House break in reported around {place}", "burglary"),
    ("Another scam call claiming to be the bank, {place} folks beware", "fraud"),
    ("Small fire, looks like arson behind {place}", "arson"),
    ("Lovely morning for a run around {place}", None),
    ("Best dumplings in {place}, no contest", None),
]

CITY_TEMPLATES = [
    "San Francisco never sleeps, neither do the sirens",
    "heard about another robbery in san francisco downtown",
    "SF streets feel different late at night",
]

BASE = datetime(2018, 1, 1, tzinfo=timezone.utc)
WINDOW_DAYS = 1806  # through 2022-12-12, the demo observation window


def grid_districts():
    """3x3 grid of square districts over an SF-sized lon/lat box."""
    lon0, lat0 = -122.52, 37.70
    dlon, dlat = 0.05, 0.04
    features = []
    for i, name in enumerate(DISTRICT_NAMES):
        col, row = i % 3, i // 3
        west, south = lon0 + col * dlon, lat0 + row * dlat
        ring = [[west, south], [west + dlon, south],
                [west + dlon, south + dlat], [west, south + dlat],
                [west, south]]
        features.append({
            "type": "Feature",
            "properties": {"name": name},
            "geometry": {"type": "Polygon", "coordinates": [ring]},
        })
    return {"type": "FeatureCollection", "features": features}


def district_center(index):
    col, row = index % 3, index // 3
    return (-122.52 + col * 0.05 + 0.025, 37.70 + row * 0.04 + 0.02)


def random_point_in(index, rng):
    col, row = index % 3, index // 3
    lon = -122.52 + col * 0.05 + rng.uniform(0.003, 0.047)
    lat = 37.70 + row * 0.04 + rng.uniform(0.003, 0.037)
    return lon, lat


def make_crimes(rng, n):
    weights = [w for _, w in CATEGORY_POOL]
    header = ("Incident ID,Incident Datetime,Report Datetime,"
              "Incident Category,Analysis Neighborhood,Police District,"
              "Latitude,Longitude")
    lines = [header]
    for i in range(n):
        district = rng.choices(range(len(DISTRICT_NAMES)),
                               weights=INTENSITY, k=1)[0]
        category = rng.choices([c for c, _ in CATEGORY_POOL],
                               weights=weights, k=1)[0]
        occurred = BASE + timedelta(minutes=rng.randrange(WINDOW_DAYS * 24 * 60))
        reported = occurred + timedelta(minutes=rng.randrange(5, 48 * 60))
        lon, lat = random_point_in(district, rng)
        name = DISTRICT_NAMES[district] if rng.random() < 0.7 else ""
        lat_text = f"{lat:.6f}" if rng.random() > 0.01 else ""  # a little dirt
        lines.append(",".join([
            f"cr{i:06d}",
            occurred.strftime("%Y/%m/%d %I:%M:%S %p"),
            reported.strftime("%Y/%m/%d %I:%M:%S %p"),
            category, name, "DEMO", lat_text, f"{lon:.6f}",
        ]))
    return "\n".join(lines) + "\n"


def make_posts(rng, n, cache):
    lines = []
    for i in range(n):
        when = BASE + timedelta(minutes=rng.randrange(WINDOW_DAYS * 24 * 60))
        obj = {"id": f"tw{i:06d}", "created_at": when.isoformat()}
        roll = rng.random()
        if roll < 0.12:
            text = rng.choice(CITY_TEMPLATES) + f" #{i}"
            obj["text"] = text
            # Pre-resolve city-level texts so --stub-geocoder works offline.
            district = rng.choices(range(len(DISTRICT_NAMES)),
                                   weights=INTENSITY, k=1)[0]
            lon, lat = district_center(district)
            cache.put(normalize_place_text(text), lat, lon)
        else:
            district = rng.choices(range(len(DISTRICT_NAMES)),
                                   weights=INTENSITY, k=1)[0]
            template, _ = rng.choice(POST_TEMPLATES)
            obj["text"] = template.format(place=DISTRICT_NAMES[district])
            if rng.random() < 0.35:
                lon, lat = random_point_in(district, rng)
                obj["lat"], obj["lon"] = round(lat, 6), round(lon, 6)
        lines.append(json.dumps(obj))
    return "\n".join(lines) + "\n"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="demo", help="output directory")
    parser.add_argument("--crimes", type=int, default=6000)
    parser.add_argument("--posts", type=int, default=1200)
    parser.add_argument("--seed", type=int, default=20180101)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    (out / "districts.geojson").write_text(
        json.dumps(grid_districts(), indent=2) + "\n", encoding="utf-8")
    (out / "crimes.csv").write_text(make_crimes(rng, args.crimes),
                                    encoding="utf-8")
    cache = GeocodeCache()
    (out / "posts.ndjson").write_text(make_posts(rng, args.posts, cache),
                                      encoding="utf-8")
    cache.save(out / "geocache.tsv")
    print(f"wrote districts.geojson, crimes.csv ({args.crimes} rows), "
          f"posts.ndjson ({args.posts} rows), geocache.tsv to {out}/")


if __name__ == "__main__":
    main()
