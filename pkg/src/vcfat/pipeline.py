"""End-to-end orchestration: raw files -> record store -> snapshot.

The record store is a directory of normalized records written by the
ingest step and read by the build step, so the expensive pass (parsing,
locating, classifying, geocoding) runs once:

    neighborhoods.geojson   normalized districts (id, display_name props)
    crimes.ndjson           one CrimeIncident per line
    posts.ndjson            one PostRecord per line, location + category filled
    report.json             ingest reports, traffic filter count, categories
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .analytics import AggregateSnapshot, build_snapshot, neighborhoods_to_geojson
from .classify import Lexicon, classify_crime_type, tokenize
from .config import IngestConfig
from .ingest import (
    filter_minor_traffic,
    parse_crime_csv,
    parse_neighborhoods,
    parse_posts,
)
from .locate import (
    Gazetteer,
    GeocodeCache,
    build_spatial_index,
    locate_point,
    resolve_location,
)
from .model import (
    CategoryRegistry,
    CrimeIncident,
    IngestError,
    IngestReport,
    NeighborhoodSet,
    PostRecord,
)


@dataclass
class IngestResult:
    crimes: list[CrimeIncident]
    posts: list[PostRecord]
    neighborhoods: NeighborhoodSet
    registry: CategoryRegistry
    crime_report: IngestReport
    post_report: IngestReport
    traffic_removed: int = 0
    notes: dict = field(default_factory=dict)

    def report_json(self) -> dict:
        return {
            "crimes": {**self.crime_report.to_json(),
                       "traffic_removed": self.traffic_removed},
            "posts": self.post_report.to_json(),
            "categories": [[c.id, c.display_name] for c in self.registry],
        }


def run_ingest(
    crimes_path: str | Path,
    posts_path: str | Path,
    districts_path: str | Path,
    config: IngestConfig,
    geocoder=None,
    cache: GeocodeCache | None = None,
) -> IngestResult:
    """Parse, filter, locate, and classify everything.

    Crime districts come from the source neighborhood column when it
    names a known district, else from point-in-polygon on the record
    coordinates. Posts are located by the resolve_location priority
    rules and classified against the configured lexicon.
    """
    with open(districts_path, "rb") as fh:
        neighborhoods = parse_neighborhoods(fh)
    index = build_spatial_index(neighborhoods)
    gazetteer = Gazetteer(neighborhoods, config.city_aliases)
    registry = config.registry()
    lexicon = Lexicon(config.lexicon, registry)

    with open(crimes_path, "rb") as fh:
        crimes, crime_report = parse_crime_csv(
            fh, config.column_map,
            category_normalization=config.category_normalization,
            registry=registry)
    crimes, traffic_removed = filter_minor_traffic(crimes, config.traffic_exclusions)
    for crime in crimes:
        if crime.neighborhood is None or crime.neighborhood not in neighborhoods:
            crime.neighborhood = locate_point(index, crime.latitude, crime.longitude)

    with open(posts_path, "rb") as fh:
        posts, post_report = parse_posts(fh)
    for post in posts:
        post.location = resolve_location(post, index, gazetteer,
                                         cache=cache, provider=geocoder)
        post.category = classify_crime_type(tokenize(post.text), lexicon)

    return IngestResult(
        crimes=crimes,
        posts=posts,
        neighborhoods=neighborhoods,
        registry=registry,
        crime_report=crime_report,
        post_report=post_report,
        traffic_removed=traffic_removed,
    )


def write_store(result: IngestResult, store_dir: str | Path) -> None:
    store = Path(store_dir)
    store.mkdir(parents=True, exist_ok=True)
    (store / "neighborhoods.geojson").write_text(
        json.dumps(neighborhoods_to_geojson(result.neighborhoods)) + "\n",
        encoding="utf-8")
    with open(store / "crimes.ndjson", "w", encoding="utf-8") as fh:
        for crime in result.crimes:
            fh.write(json.dumps(crime.to_json()) + "\n")
    with open(store / "posts.ndjson", "w", encoding="utf-8") as fh:
        for post in result.posts:
            fh.write(json.dumps(post.to_json()) + "\n")
    (store / "report.json").write_text(
        json.dumps(result.report_json(), indent=2) + "\n", encoding="utf-8")


def _neighborhoods_from_normalized(obj: dict) -> NeighborhoodSet:
    # The store file carries explicit id properties; no re-slugging.
    from .ingest import _closed_rings
    from .model import Neighborhood

    neighborhoods = []
    for feature in obj.get("features", []):
        props = feature.get("properties") or {}
        neighborhoods.append(Neighborhood(
            id=props["id"],
            display_name=props.get("display_name", props["id"]),
            polygons=tuple(_closed_rings(feature.get("geometry") or {},
                                         props["id"])),
        ))
    return NeighborhoodSet(neighborhoods)


def read_store(store_dir: str | Path):
    """Load the normalized records back; returns (crimes, posts,
    neighborhoods, registry)."""
    from .model import Category

    store = Path(store_dir)
    if not (store / "report.json").exists():
        raise IngestError(f"not a record store (no report.json): {store}")
    neighborhoods = _neighborhoods_from_normalized(json.loads(
        (store / "neighborhoods.geojson").read_text(encoding="utf-8")))
    crimes = [CrimeIncident.from_json(json.loads(line))
              for line in (store / "crimes.ndjson").read_text(encoding="utf-8").splitlines()
              if line.strip()]
    posts = [PostRecord.from_json(json.loads(line))
             for line in (store / "posts.ndjson").read_text(encoding="utf-8").splitlines()
             if line.strip()]
    report = json.loads((store / "report.json").read_text(encoding="utf-8"))
    registry = CategoryRegistry(
        [Category(cid, name) for cid, name in report.get("categories", [])])
    return crimes, posts, neighborhoods, registry


def build_from_store(store_dir: str | Path) -> AggregateSnapshot:
    crimes, posts, neighborhoods, registry = read_store(store_dir)
    return build_snapshot(crimes, posts, neighborhoods, registry)
