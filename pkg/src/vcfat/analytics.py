"""The aggregate snapshot and every query the views need.

Counts are stored once, at day granularity, in an immutable snapshot;
week/month/year views roll up from days at query time so every
granularity derives from one source of truth. Heatmap values are raw
counts, not rates. Time filtering is at day resolution: the half-open
query range [from, to) selects whole day buckets, matching the API
contract of dates interpreted as UTC midnight.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path

from .model import (
    Category,
    CategoryRegistry,
    CrimeIncident,
    DegenerateStatisticError,
    NeighborhoodSet,
    PostRecord,
    UNCATEGORIZED,
    UnknownSourceError,
)
from .timebuckets import (
    GRANULARITIES,
    bucket_of,
    bucket_start,
    buckets_in_range,
    parse_instant,
)

SNAPSHOT_FORMAT = "vcfat-snapshot"
SNAPSHOT_VERSION = 1


class SnapshotFormatError(Exception):
    """Snapshot file is unreadable, wrong format, or fails its hash check."""


@dataclass(frozen=True)
class Series:
    """Zero-filled counts over contiguous ascending buckets."""

    source: str
    granularity: str
    points: tuple[tuple[str, int], ...]

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "granularity": self.granularity,
            "points": [{"bucket": k, "count": n} for k, n in self.points],
        }


@dataclass(frozen=True)
class ColocationResult:
    """Per-district crime/post counts joined with their rank correlation."""

    rows: tuple[tuple[str, int, int], ...]  # (district, crime_count, post_count)
    rho: float | None
    rho_reason: str | None
    n: int

    def to_json(self) -> dict:
        out: dict = {
            "rows": [{"neighborhood": d, "crime_count": c, "post_count": p}
                     for d, c, p in self.rows],
            "n": self.n,
            "rho": self.rho,
        }
        if self.rho_reason:
            out["rho_reason"] = self.rho_reason
        return out


class AggregateSnapshot:
    """Immutable dense counts cube: source x district x category x day.

    Physically sparse (cells hold only nonzero counts); queries fill
    zeros. ``build_id`` is a content hash over everything served, so a
    byte-identical rebuild reproduces it and any data change rotates it.
    """

    def __init__(
        self,
        cells: dict[tuple[str, str, str, str], int],
        districts: list[tuple[str, str]],
        categories: list[tuple[str, str]],
        totals: dict[str, dict[str, int]],
        period: tuple[datetime, datetime] | None,
        neighborhoods_geojson: dict | None = None,
    ):
        self.cells = dict(cells)
        self.districts = sorted(districts)
        self.categories = sorted(categories)
        self.totals = totals
        self.period = period
        self.neighborhoods_geojson = neighborhoods_geojson
        self.build_id = hashlib.sha256(
            json.dumps(self._payload(), sort_keys=True, separators=(",", ":"))
            .encode("utf-8")).hexdigest()

    def district_ids(self) -> list[str]:
        return [d for d, _ in self.districts]

    def category_registry(self) -> CategoryRegistry:
        registry = CategoryRegistry([Category(c, name) for c, name in self.categories])
        registry.add(Category(UNCATEGORIZED, "Uncategorized"))
        return registry

    def _payload(self) -> dict:
        period = None
        if self.period is not None:
            period = {"from": self.period[0].isoformat(),
                      "to": self.period[1].isoformat()}
        return {
            "format": SNAPSHOT_FORMAT,
            "version": SNAPSHOT_VERSION,
            "granularities": list(GRANULARITIES),
            "districts": [list(d) for d in self.districts],
            "categories": [list(c) for c in self.categories],
            "totals": self.totals,
            "period": period,
            "cells": [[s, d, c, day, n]
                      for (s, d, c, day), n in sorted(self.cells.items())],
            "neighborhoods": self.neighborhoods_geojson,
        }

    def to_json(self) -> dict:
        payload = self._payload()
        payload["build_id"] = self.build_id
        return payload

    @classmethod
    def from_json(cls, obj: dict) -> "AggregateSnapshot":
        if obj.get("format") != SNAPSHOT_FORMAT:
            raise SnapshotFormatError(f"not a snapshot file: format={obj.get('format')!r}")
        if obj.get("version") != SNAPSHOT_VERSION:
            raise SnapshotFormatError(f"unsupported snapshot version: {obj.get('version')!r}")
        period = None
        if obj.get("period"):
            period = (parse_instant(obj["period"]["from"]),
                      parse_instant(obj["period"]["to"]))
        snapshot = cls(
            cells={(s, d, c, day): n for s, d, c, day, n in obj.get("cells", [])},
            districts=[tuple(d) for d in obj.get("districts", [])],
            categories=[tuple(c) for c in obj.get("categories", [])],
            totals=obj.get("totals", {}),
            period=period,
            neighborhoods_geojson=obj.get("neighborhoods"),
        )
        expected = obj.get("build_id")
        if expected is not None and expected != snapshot.build_id:
            raise SnapshotFormatError(
                f"snapshot content hash mismatch: file says {expected[:12]}..., "
                f"recomputed {snapshot.build_id[:12]}...")
        return snapshot


def save_snapshot(snapshot: AggregateSnapshot, path: str | Path) -> None:
    Path(path).write_text(json.dumps(snapshot.to_json()) + "\n", encoding="utf-8")


def load_snapshot(path: str | Path) -> AggregateSnapshot:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotFormatError(f"cannot read snapshot {path}: {exc}") from exc
    return AggregateSnapshot.from_json(obj)


def build_snapshot(
    crimes: list[CrimeIncident],
    posts: list[PostRecord],
    neighborhoods: NeighborhoodSet | None = None,
    category_registry: CategoryRegistry | None = None,
) -> AggregateSnapshot:
    """Tally located records into day-level cells.

    Each located record contributes exactly 1 to exactly one cell.
    Located posts without a category count under the reserved
    "uncategorized" id so unfiltered post totals still include them;
    records without a district are excluded from cells but tallied in
    the totals metadata. Ambiguous posts already carry their
    first-mention district in the assignment.
    """
    cells: dict[tuple[str, str, str, str], int] = {}
    totals = {
        "crime": {"records": len(crimes), "counted": 0, "unlocated": 0,
                  "uncategorized": 0},
        "post": {"records": len(posts), "counted": 0, "unlocated": 0,
                 "uncategorized": 0},
    }

    district_names: dict[str, str] = {}
    if neighborhoods is not None:
        for n in neighborhoods:
            district_names[n.id] = n.display_name
    category_names: dict[str, str] = {}
    if category_registry is not None:
        for cat in category_registry:
            category_names[cat.id] = cat.display_name

    min_t: datetime | None = None
    max_t: datetime | None = None

    def observe(t: datetime) -> None:
        nonlocal min_t, max_t
        if min_t is None or t < min_t:
            min_t = t
        if max_t is None or t > max_t:
            max_t = t

    for crime in crimes:
        observe(crime.occurred_at)
        if crime.neighborhood is None:
            totals["crime"]["unlocated"] += 1
            continue
        key = ("crime", crime.neighborhood, crime.category,
               bucket_of(crime.occurred_at, "day"))
        cells[key] = cells.get(key, 0) + 1
        totals["crime"]["counted"] += 1
        district_names.setdefault(crime.neighborhood, crime.neighborhood)
        category_names.setdefault(crime.category, crime.raw_category or crime.category)

    for post in posts:
        observe(post.created_at)
        district = post.location.neighborhood if post.location else None
        if district is None:
            totals["post"]["unlocated"] += 1
            continue
        category = post.category or UNCATEGORIZED
        if post.category is None:
            totals["post"]["uncategorized"] += 1
        key = ("post", district, category, bucket_of(post.created_at, "day"))
        cells[key] = cells.get(key, 0) + 1
        totals["post"]["counted"] += 1
        district_names.setdefault(district, district)
        if category != UNCATEGORIZED:
            category_names.setdefault(category, category)

    category_names.setdefault(UNCATEGORIZED, "Uncategorized")

    geojson = None
    if neighborhoods is not None:
        geojson = neighborhoods_to_geojson(neighborhoods)

    period = (min_t, max_t) if min_t is not None else None
    return AggregateSnapshot(
        cells=cells,
        districts=sorted(district_names.items()),
        categories=sorted(category_names.items()),
        totals=totals,
        period=period,
        neighborhoods_geojson=geojson,
    )


def neighborhoods_to_geojson(neighborhoods: NeighborhoodSet) -> dict:
    """Normalized FeatureCollection with id and display_name properties."""
    features = []
    for n in neighborhoods:
        if len(n.polygons) == 1:
            geometry = {"type": "Polygon",
                        "coordinates": [[list(p) for p in ring]
                                        for ring in n.polygons[0]]}
        else:
            geometry = {"type": "MultiPolygon",
                        "coordinates": [[[list(p) for p in ring] for ring in poly]
                                        for poly in n.polygons]}
        features.append({
            "type": "Feature",
            "properties": {"id": n.id, "display_name": n.display_name},
            "geometry": geometry,
        })
    return {"type": "FeatureCollection", "features": features}


def _selected_days(q) -> set[str]:
    return set(buckets_in_range(q.from_, q.to, "day"))


def query_counts(snapshot: AggregateSnapshot, q) -> dict[str, int]:
    """Per-district counts over the query range and category filter.

    Every district appears, zero-filled. The source must be a single
    source; "both" is only meaningful for timelines.
    """
    q = q.validated(snapshot.category_registry())
    if q.source == "both":
        raise UnknownSourceError('source "both" is not valid for aggregates')
    days = _selected_days(q)
    acc: dict[str, int] = {d: 0 for d in snapshot.district_ids()}
    for (source, district, category, day), n in snapshot.cells.items():
        if source != q.source or day not in days:
            continue
        if q.category is not None and category != q.category:
            continue
        if district in acc:
            acc[district] += n
    return acc


def timeline(snapshot: AggregateSnapshot, q) -> list[Series]:
    """City-wide counts per bucket at the query granularity.

    Returns one Series per requested source (two for "both"), zero-filled
    across the full bucket range; day cells roll up exactly.
    """
    q = q.validated(snapshot.category_registry())
    sources = ("crime", "post") if q.source == "both" else (q.source,)
    days = _selected_days(q)
    keys = buckets_in_range(q.from_, q.to, q.granularity)

    day_to_bucket: dict[str, str] = {}
    out = []
    for source in sources:
        acc = {k: 0 for k in keys}
        for (cell_source, _district, category, day), n in snapshot.cells.items():
            if cell_source != source or day not in days:
                continue
            if q.category is not None and category != q.category:
                continue
            bucket = day_to_bucket.get(day)
            if bucket is None:
                bucket = bucket_of(bucket_start(day, "day"), q.granularity)
                day_to_bucket[day] = bucket
            acc[bucket] += n
        out.append(Series(source, q.granularity,
                          tuple((k, acc[k]) for k in keys)))
    return out


def cumulative(series: Series) -> Series:
    """Running prefix sum over the series points; keys unchanged."""
    total = 0
    points = []
    for key, count in series.points:
        total += count
        points.append((key, total))
    return Series(series.source, series.granularity, tuple(points))


def _average_ranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(xs: list[float], ys: list[float]) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks.

    Ties receive the mean of their rank span. Raises ValueError on a
    length mismatch and DegenerateStatisticError when fewer than two
    points or either vector is constant.
    """
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise DegenerateStatisticError("too-few-points")
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        raise DegenerateStatisticError("constant-vector")

    rx = _average_ranks(list(xs))
    ry = _average_ranks(list(ys))
    mean_x = sum(rx) / n
    mean_y = sum(ry) / n
    cov = sum((a - mean_x) * (b - mean_y) for a, b in zip(rx, ry))
    var_x = sum((a - mean_x) ** 2 for a in rx)
    var_y = sum((b - mean_y) ** 2 for b in ry)
    return cov / math.sqrt(var_x * var_y)


def colocate(snapshot: AggregateSnapshot, q) -> ColocationResult:
    """Join per-district crime and post counts; quantify their agreement.

    The Spearman rho over the two count vectors makes the "similar
    pattern in both heatmaps" impression measurable. Degenerate input
    (under two districts, constant counts) yields rho=None with a stated
    reason instead of an error or NaN.
    """
    crime_counts = query_counts(snapshot, replace(q, source="crime"))
    post_counts = query_counts(snapshot, replace(q, source="post"))
    rows = tuple((d, crime_counts[d], post_counts[d])
                 for d in snapshot.district_ids())
    rho: float | None = None
    reason: str | None = None
    try:
        rho = spearman([r[1] for r in rows], [r[2] for r in rows])
    except DegenerateStatisticError as exc:
        reason = str(exc)
    return ColocationResult(rows, rho, reason, len(rows))
