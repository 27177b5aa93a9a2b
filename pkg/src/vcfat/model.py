"""Shared domain vocabulary: categories, districts, records, and queries."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime

from .timebuckets import GRANULARITIES, ensure_utc

SOURCES = ("crime", "post")

#: Reserved category id for located posts whose text matched no lexicon
#: entry. They count in unfiltered totals but in no named category.
UNCATEGORIZED = "uncategorized"


class QueryError(Exception):
    """Base for query validation failures; ``code`` is the wire error token."""

    code = "invalid-query"


class InvalidRangeError(QueryError):
    code = "invalid-range"


class UnknownCategoryError(QueryError):
    code = "unknown-category"


class UnknownSourceError(QueryError):
    code = "unknown-source"


class DegenerateStatisticError(QueryError):
    code = "degenerate-statistic"


class IngestError(Exception):
    """Fatal ingestion problem (bad header, invalid GeoJSON, duplicate id)."""


def slugify(name: str) -> str:
    """Lowercase a display name into a stable id token.

    Runs of non-alphanumeric characters collapse to single hyphens:
    "Mission District" -> "mission-district".
    """
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return slug


@dataclass(frozen=True)
class Category:
    id: str
    display_name: str


class CategoryRegistry:
    """Known crime categories, keyed by canonical lowercase id."""

    def __init__(self, categories: list[Category] | None = None):
        self._by_id: dict[str, Category] = {}
        for cat in categories or []:
            self.add(cat)

    def add(self, category: Category) -> None:
        if category.id in self._by_id:
            return
        self._by_id[category.id] = category

    def __contains__(self, category_id: str) -> bool:
        return category_id in self._by_id

    def __iter__(self):
        return iter(sorted(self._by_id.values(), key=lambda c: c.id))

    def __len__(self) -> int:
        return len(self._by_id)

    def get(self, category_id: str) -> Category | None:
        return self._by_id.get(category_id)


@dataclass(frozen=True)
class Neighborhood:
    """One district: id slug, display name, and polygon geometry.

    ``polygons`` uses GeoJSON structure and (lon, lat) point order: a list
    of polygons, each a list of closed rings, each ring a list of
    (lon, lat) tuples. Plain Polygon features become a one-element list.
    """

    id: str
    display_name: str
    polygons: tuple  # tuple of polygons -> tuple of rings -> tuple of (lon, lat)

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(min_lon, min_lat, max_lon, max_lat) over all rings."""
        lons = [p[0] for poly in self.polygons for ring in poly for p in ring]
        lats = [p[1] for poly in self.polygons for ring in poly for p in ring]
        return (min(lons), min(lats), max(lons), max(lats))


class NeighborhoodSet:
    """Immutable set of districts; the spatial frame for all aggregation."""

    def __init__(self, neighborhoods: list[Neighborhood]):
        by_id: dict[str, Neighborhood] = {}
        for n in neighborhoods:
            if n.id in by_id:
                raise IngestError(f"duplicate neighborhood id: {n.id!r}")
            by_id[n.id] = n
        self._by_id = by_id

    def __iter__(self):
        return iter(sorted(self._by_id.values(), key=lambda n: n.id))

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, neighborhood_id: str) -> bool:
        return neighborhood_id in self._by_id

    def get(self, neighborhood_id: str) -> Neighborhood | None:
        return self._by_id.get(neighborhood_id)

    def ids(self) -> list[str]:
        return sorted(self._by_id)


@dataclass(frozen=True)
class AnalyticsQuery:
    """The one query shape shared by the API, CLI, and UI.

    ``from_``/``to`` bound a half-open UTC range [from, to). ``category``
    of None means all categories.
    """

    source: str
    from_: datetime
    to: datetime
    granularity: str
    category: str | None = None

    def validated(self, registry: CategoryRegistry) -> "AnalyticsQuery":
        if self.source not in SOURCES and self.source != "both":
            raise UnknownSourceError(f"unknown source: {self.source!r}")
        if self.granularity not in GRANULARITIES:
            raise InvalidRangeError(f"unknown granularity: {self.granularity!r}")
        from_, to = ensure_utc(self.from_), ensure_utc(self.to)
        if from_ >= to:
            raise InvalidRangeError("empty range: from must precede to")
        if self.category is not None and self.category != UNCATEGORIZED:
            if self.category not in registry:
                raise UnknownCategoryError(f"unknown category: {self.category!r}")
        return AnalyticsQuery(self.source, from_, to, self.granularity, self.category)


@dataclass(frozen=True)
class LocationAssignment:
    """How a post was pinned to a district, if at all.

    Exactly one method per assignment; ``neighborhood`` is present iff the
    method is not "unresolved". ``mentions`` lists matched districts in
    first-occurrence order when the method is "text-mention"; ``ambiguous``
    is set when two or more distinct districts were mentioned. ``note``
    records degradations such as a geocoder transport failure.
    """

    neighborhood: str | None
    method: str  # geotag-pip | text-mention | geocoded | unresolved
    ambiguous: bool = False
    mentions: tuple[str, ...] = ()
    note: str | None = None

    def __post_init__(self):
        assert (self.neighborhood is None) == (self.method == "unresolved")
        assert not self.ambiguous or len(self.mentions) >= 2

    def to_json(self) -> dict:
        out: dict = {"neighborhood": self.neighborhood, "method": self.method}
        if self.ambiguous:
            out["ambiguous"] = True
        if self.mentions:
            out["mentions"] = list(self.mentions)
        if self.note:
            out["note"] = self.note
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "LocationAssignment":
        return cls(
            neighborhood=obj.get("neighborhood"),
            method=obj["method"],
            ambiguous=bool(obj.get("ambiguous", False)),
            mentions=tuple(obj.get("mentions", ())),
            note=obj.get("note"),
        )


@dataclass
class CrimeIncident:
    """One factual crime record after normalization."""

    incident_id: str
    occurred_at: datetime
    reported_at: datetime
    category: str
    raw_category: str
    neighborhood: str | None
    police_district: str
    latitude: float
    longitude: float
    clock_skew: bool = False  # occurred_at > reported_at in the source row

    def to_json(self) -> dict:
        return {
            "incident_id": self.incident_id,
            "occurred_at": self.occurred_at.isoformat(),
            "reported_at": self.reported_at.isoformat(),
            "category": self.category,
            "raw_category": self.raw_category,
            "neighborhood": self.neighborhood,
            "police_district": self.police_district,
            "latitude": self.latitude,
            "longitude": self.longitude,
            "clock_skew": self.clock_skew,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CrimeIncident":
        from .timebuckets import parse_instant

        return cls(
            incident_id=obj["incident_id"],
            occurred_at=parse_instant(obj["occurred_at"]),
            reported_at=parse_instant(obj["reported_at"]),
            category=obj["category"],
            raw_category=obj["raw_category"],
            neighborhood=obj.get("neighborhood"),
            police_district=obj.get("police_district", ""),
            latitude=obj["latitude"],
            longitude=obj["longitude"],
            clock_skew=bool(obj.get("clock_skew", False)),
        )


@dataclass
class PostRecord:
    """One social-media post; location and category are filled downstream."""

    post_id: str
    created_at: datetime
    text: str
    latitude: float | None = None
    longitude: float | None = None
    location: LocationAssignment | None = None
    category: str | None = None

    def to_json(self) -> dict:
        return {
            "post_id": self.post_id,
            "created_at": self.created_at.isoformat(),
            "text": self.text,
            "latitude": self.latitude,
            "longitude": self.longitude,
            "location": self.location.to_json() if self.location else None,
            "category": self.category,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PostRecord":
        from .timebuckets import parse_instant

        loc = obj.get("location")
        return cls(
            post_id=obj["post_id"],
            created_at=parse_instant(obj["created_at"]),
            text=obj.get("text", ""),
            latitude=obj.get("latitude"),
            longitude=obj.get("longitude"),
            location=LocationAssignment.from_json(loc) if loc else None,
            category=obj.get("category"),
        )


@dataclass
class IngestReport:
    """Row accounting for one parser pass; always conserves rows."""

    rows_read: int = 0
    rows_accepted: int = 0
    rows_rejected: int = 0
    rejection_reasons: dict[str, int] = field(default_factory=dict)

    def reject(self, reason: str) -> None:
        self.rows_rejected += 1
        self.rejection_reasons[reason] = self.rejection_reasons.get(reason, 0) + 1

    def accept(self) -> None:
        self.rows_accepted += 1

    def to_json(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_accepted": self.rows_accepted,
            "rows_rejected": self.rows_rejected,
            "rejection_reasons": dict(sorted(self.rejection_reasons.items())),
        }
