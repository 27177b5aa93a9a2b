"""Parsers for the three input files, plus the traffic-record filter.

Inputs are dirty open-data exports: malformed rows reject individually
and are tallied by reason in an IngestReport, never aborting the pass.
Only structural problems (missing header, unmapped required column,
invalid GeoJSON) are fatal.
"""
from __future__ import annotations

import csv
import io
import json
from datetime import datetime, timezone
from typing import IO, Iterable

from .config import CANONICAL_CRIME_FIELDS
from .model import (
    Category,
    CategoryRegistry,
    CrimeIncident,
    IngestError,
    IngestReport,
    Neighborhood,
    NeighborhoodSet,
    PostRecord,
    slugify,
)
from .timebuckets import parse_instant

# Timestamp shapes seen in municipal CSV exports, tried after ISO-8601.
_CSV_TIMESTAMP_FORMATS = (
    "%Y/%m/%d %I:%M:%S %p",
    "%Y/%m/%d %H:%M:%S",
    "%Y/%m/%d %H:%M",
    "%m/%d/%Y %I:%M:%S %p",
    "%m/%d/%Y %H:%M:%S",
    "%m/%d/%Y %H:%M",
)


def _text_stream(stream: IO) -> IO[str]:
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, str):
        return io.StringIO(stream)
    first = stream.read(0)
    if isinstance(first, bytes):
        return io.TextIOWrapper(stream, encoding="utf-8", newline="")
    return stream


def _parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if not text:
        raise ValueError("empty timestamp")
    try:
        return parse_instant(text)
    except ValueError:
        pass
    for fmt in _CSV_TIMESTAMP_FORMATS:
        try:
            return datetime.strptime(text, fmt).replace(tzinfo=timezone.utc)
        except ValueError:
            continue
    raise ValueError(f"unparseable timestamp: {text!r}")


def normalize_category(
    raw: str,
    normalization: dict[str, str],
    registry: CategoryRegistry,
) -> str:
    """Map raw category text onto a canonical registry id.

    Lookup order: explicit normalization table, then slugified raw text.
    Unknown-but-present categories are registered on the fly rather than
    rejected; only empty text is a missing category.
    """
    lowered = raw.strip().lower()
    if lowered in normalization:
        return normalization[lowered]
    slug = slugify(raw)
    if slug not in registry:
        registry.add(Category(slug, raw.strip()))
    return slug


def parse_crime_csv(
    stream: IO,
    column_map: dict[str, str],
    *,
    category_normalization: dict[str, str] | None = None,
    registry: CategoryRegistry | None = None,
) -> tuple[list[CrimeIncident], IngestReport]:
    """Parse a crime CSV export into CrimeIncident records.

    ``column_map`` maps raw header names onto the canonical fields; extra
    columns are ignored. Raises IngestError when the header is missing or
    a required canonical field has no mapped column. Malformed data rows
    are rejected row-by-row and counted in the report.
    """
    normalization = category_normalization or {}
    registry = registry if registry is not None else CategoryRegistry()
    reader = csv.reader(_text_stream(stream))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("crime CSV has no header row") from None

    field_index: dict[str, int] = {}
    for i, raw_name in enumerate(header):
        canonical = column_map.get(raw_name.strip())
        if canonical and canonical not in field_index:
            field_index[canonical] = i
    missing = [f for f in CANONICAL_CRIME_FIELDS if f not in field_index]
    if missing:
        raise IngestError(f"crime CSV header lacks mapped columns for: {missing}")

    report = IngestReport()
    incidents: list[CrimeIncident] = []
    for row in reader:
        report.rows_read += 1
        get = lambda f: row[field_index[f]].strip() if field_index[f] < len(row) else ""

        lat_text, lon_text = get("latitude"), get("longitude")
        if not lat_text or not lon_text:
            report.reject("missing-coordinate")
            continue
        try:
            lat, lon = float(lat_text), float(lon_text)
        except ValueError:
            report.reject("bad-coordinate")
            continue
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            report.reject("bad-coordinate")
            continue
        try:
            occurred = _parse_timestamp(get("occurred_at"))
            reported = _parse_timestamp(get("reported_at"))
        except ValueError:
            report.reject("bad-timestamp")
            continue
        raw_category = get("category")
        if not raw_category:
            report.reject("missing-category")
            continue

        neighborhood_text = get("neighborhood")
        incidents.append(CrimeIncident(
            incident_id=get("incident_id"),
            occurred_at=occurred,
            reported_at=reported,
            category=normalize_category(raw_category, normalization, registry),
            raw_category=raw_category,
            neighborhood=slugify(neighborhood_text) if neighborhood_text else None,
            police_district=get("police_district"),
            latitude=lat,
            longitude=lon,
            clock_skew=occurred > reported,
        ))
        report.accept()
    return incidents, report


def parse_posts(stream: IO) -> tuple[list[PostRecord], IngestReport]:
    """Parse NDJSON posts: one object per line with id, created_at, text,
    and optional lat/lon. Blank lines are skipped silently; bad lines are
    rejected per-line, never fatally.
    """
    report = IngestReport()
    posts: list[PostRecord] = []
    for line in _text_stream(stream):
        line = line.strip()
        if not line:
            continue
        report.rows_read += 1
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            report.reject("bad-json")
            continue
        if not isinstance(obj, dict):
            report.reject("bad-json")
            continue
        post_id = obj.get("id")
        if post_id is None or str(post_id) == "":
            report.reject("missing-id")
            continue
        try:
            created_at = parse_instant(str(obj.get("created_at", "")))
        except ValueError:
            report.reject("bad-timestamp")
            continue

        lat, lon = obj.get("lat"), obj.get("lon")
        text = str(obj.get("text") or "")
        if (lat is None) != (lon is None):
            report.reject("bad-coordinate")
            continue
        if lat is not None:
            try:
                lat, lon = float(lat), float(lon)
            except (TypeError, ValueError):
                report.reject("bad-coordinate")
                continue
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                report.reject("bad-coordinate")
                continue
        if lat is None and not text:
            report.reject("empty-record")
            continue

        posts.append(PostRecord(
            post_id=str(post_id),
            created_at=created_at,
            text=text,
            latitude=lat,
            longitude=lon,
        ))
        report.accept()
    return posts, report


def _closed_rings(geometry: dict, feature_name: str) -> list:
    gtype = geometry.get("type")
    if gtype == "Polygon":
        polygons = [geometry.get("coordinates", [])]
    elif gtype == "MultiPolygon":
        polygons = geometry.get("coordinates", [])
    else:
        raise IngestError(
            f"feature {feature_name!r}: unsupported geometry type {gtype!r}")
    out = []
    for rings in polygons:
        if not rings:
            raise IngestError(f"feature {feature_name!r}: polygon with no rings")
        converted = []
        for ring in rings:
            if len(ring) < 4:
                raise IngestError(
                    f"feature {feature_name!r}: ring with fewer than 4 points")
            if list(ring[0]) != list(ring[-1]):
                raise IngestError(f"feature {feature_name!r}: open ring")
            converted.append(tuple((float(p[0]), float(p[1])) for p in ring))
        out.append(tuple(converted))
    return out


def parse_neighborhoods(stream: IO, name_property: str = "name") -> NeighborhoodSet:
    """Parse a GeoJSON FeatureCollection of district polygons.

    Ids are slugified from the name property; any structural defect
    (invalid GeoJSON, open ring, duplicate slug) is fatal.
    """
    try:
        obj = json.load(_text_stream(stream))
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid GeoJSON: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("type") != "FeatureCollection":
        raise IngestError("districts file is not a GeoJSON FeatureCollection")

    neighborhoods = []
    seen: set[str] = set()
    for feature in obj.get("features", []):
        props = feature.get("properties") or {}
        name = props.get(name_property)
        if not name:
            raise IngestError(f"feature without {name_property!r} property")
        slug = slugify(name)
        if not slug:
            raise IngestError(f"feature name {name!r} slugifies to nothing")
        if slug in seen:
            raise IngestError(f"duplicate neighborhood slug: {slug!r}")
        seen.add(slug)
        geometry = feature.get("geometry") or {}
        neighborhoods.append(Neighborhood(
            id=slug,
            display_name=str(name),
            polygons=tuple(_closed_rings(geometry, str(name))),
        ))
    return NeighborhoodSet(neighborhoods)


def filter_minor_traffic(
    incidents: Iterable[CrimeIncident],
    exclusion_patterns: Iterable[str],
) -> tuple[list[CrimeIncident], int]:
    """Drop incidents whose raw category matches any exclusion pattern.

    Patterns are case-insensitive substring matchers; order of the
    retained records is preserved.
    """
    patterns = [p.lower() for p in exclusion_patterns]
    retained = []
    removed = 0
    for incident in incidents:
        raw = incident.raw_category.lower()
        if any(p in raw for p in patterns):
            removed += 1
        else:
            retained.append(incident)
    return retained, removed
