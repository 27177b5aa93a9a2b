"""District assignment: point-in-polygon, text mentions, geocoder fallback.

Every post gets exactly one LocationAssignment, decided in priority
order: device coordinates beat text mentions beat geocoding. The
point-in-polygon test uses the even-odd (ray crossing) rule with a
bounding-box pre-filter; points sitting exactly on a shared boundary
resolve to the containing district with the smallest id.
"""
from __future__ import annotations

import json
import math
import re
import threading
import urllib.parse
import urllib.request
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .model import LocationAssignment, Neighborhood, NeighborhoodSet, PostRecord


# ---------------------------------------------------------------------------
# Point-in-polygon

def _ray_crossings(lon: float, lat: float, ring) -> int:
    """Number of times a ray cast east from the point crosses ring edges."""
    crossings = 0
    for i in range(len(ring) - 1):
        x1, y1 = ring[i]
        x2, y2 = ring[i + 1]
        if (y1 > lat) != (y2 > lat):
            x_at = (x2 - x1) * (lat - y1) / (y2 - y1) + x1
            if lon < x_at:
                crossings += 1
    return crossings


def _on_ring_boundary(lon: float, lat: float, ring) -> bool:
    for i in range(len(ring) - 1):
        x1, y1 = ring[i]
        x2, y2 = ring[i + 1]
        if (min(x1, x2) <= lon <= max(x1, x2)
                and min(y1, y2) <= lat <= max(y1, y2)):
            cross = (x2 - x1) * (lat - y1) - (y2 - y1) * (lon - x1)
            if cross == 0.0:
                return True
    return False


def _neighborhood_contains(n: Neighborhood, lat: float, lon: float) -> bool:
    """Even-odd containment; boundary points count as contained."""
    for polygon in n.polygons:
        crossings = 0
        for ring in polygon:
            if _on_ring_boundary(lon, lat, ring):
                return True
            crossings += _ray_crossings(lon, lat, ring)
        if crossings % 2 == 1:
            return True
    return False


class SpatialIndex:
    """Immutable district lookup with a bounding-box pre-filter."""

    def __init__(self, neighborhoods: NeighborhoodSet):
        self._entries = [(n.bounding_box(), n) for n in neighborhoods]

    def candidates(self, lat: float, lon: float) -> list[Neighborhood]:
        return [n for (min_lon, min_lat, max_lon, max_lat), n in self._entries
                if min_lon <= lon <= max_lon and min_lat <= lat <= max_lat]

    def __len__(self) -> int:
        return len(self._entries)


def build_spatial_index(neighborhoods: NeighborhoodSet) -> SpatialIndex:
    return SpatialIndex(neighborhoods)


def locate_point(index: SpatialIndex, lat: float, lon: float) -> str | None:
    """District id containing the point, or None if outside all districts.

    Entries are pre-sorted by id, so the first containing candidate is
    the smallest-id winner required for shared-boundary points.
    """
    for n in index.candidates(lat, lon):
        if _neighborhood_contains(n, lat, lon):
            return n.id
    return None


# ---------------------------------------------------------------------------
# Text mention matching

@dataclass(frozen=True)
class MentionResult:
    mentions: tuple[str, ...]  # district ids in first-occurrence order
    city_level: bool


class Gazetteer:
    """Lookup phrases for district names plus city-wide aliases."""

    def __init__(self, neighborhoods: NeighborhoodSet, city_aliases: list[str]):
        phrases: dict[str, str | None] = {}
        for n in neighborhoods:
            phrases.setdefault(n.display_name.lower(), n.id)
            phrases.setdefault(n.id.replace("-", " "), n.id)
        for alias in city_aliases:
            phrases.setdefault(alias.lower(), None)  # None marks a city alias
        self._patterns = [
            (re.compile(r"(?<![0-9a-z])" + re.escape(p) + r"(?![0-9a-z])"), district)
            for p, district in phrases.items()
        ]


def match_mentions(text: str, gazetteer: Gazetteer) -> MentionResult:
    """Case-insensitive whole-phrase matching on word boundaries.

    Longest match wins on overlap; mentions are district ids ordered by
    first occurrence. ``city_level`` is set when a city alias matched and
    no district did.
    """
    lowered = text.lower()
    hits = []  # (start, -length, district_or_none)
    for pattern, district in gazetteer._patterns:
        for m in pattern.finditer(lowered):
            hits.append((m.start(), -(m.end() - m.start()), m.end(), district))
    hits.sort()

    taken_end = -1
    mentions: list[str] = []
    city_matched = False
    for start, _neg_len, end, district in hits:
        if start < taken_end:
            continue
        taken_end = end
        if district is None:
            city_matched = True
        elif district not in mentions:
            mentions.append(district)
    return MentionResult(tuple(mentions), city_matched and not mentions)


# ---------------------------------------------------------------------------
# Geocoding with a persistent cache

def normalize_place_text(text: str) -> str:
    """Cache key normalization: lowercase, collapse all whitespace runs."""
    return " ".join(text.lower().split())


class GeocodeError(Exception):
    """Transport or protocol failure talking to the geocoding provider."""


class GeocodeCache:
    """Exact-match cache of normalized place text to coordinates.

    Persisted one entry per line as tab-separated fields: normalized
    text, latitude, longitude, resolved-at instant. A provider "no
    result" is remembered as a nan,nan entry so a warm cache never needs
    the provider again. Reads are lock-free; writes are serialized.
    """

    def __init__(self):
        self._entries: dict[str, tuple[float, float, str]] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, text: str) -> tuple[float, float] | None | str:
        """Returns (lat, lon), the marker "no-result", or None on miss."""
        entry = self._entries.get(normalize_place_text(text))
        if entry is None:
            return None
        lat, lon, _ = entry
        if math.isnan(lat):
            return "no-result"
        return (lat, lon)

    def put(self, text: str, lat: float, lon: float,
            resolved_at: datetime | None = None) -> None:
        stamp = (resolved_at or datetime.now(timezone.utc)).isoformat()
        with self._lock:
            self._entries[normalize_place_text(text)] = (lat, lon, stamp)

    def put_no_result(self, text: str) -> None:
        self.put(text, float("nan"), float("nan"))

    @classmethod
    def load(cls, path: str | Path) -> "GeocodeCache":
        cache = cls()
        path = Path(path)
        if not path.exists():
            return cache
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            text, lat, lon, stamp = line.split("\t")
            cache._entries[text] = (float(lat), float(lon), stamp)
        return cache

    def save(self, path: str | Path) -> None:
        with self._lock:
            lines = [f"{text}\t{lat!r}\t{lon!r}\t{stamp}"
                     for text, (lat, lon, stamp) in sorted(self._entries.items())]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""),
                              encoding="utf-8")


class StubGeocoder:
    """Deterministic offline provider for tests and --stub-geocoder runs.

    Resolves only texts present in its table; counts every call so tests
    can assert the cache short-circuits the provider.
    """

    def __init__(self, table: dict[str, tuple[float, float]] | None = None):
        self.table = {normalize_place_text(k): v for k, v in (table or {}).items()}
        self.calls = 0

    def geocode(self, text: str) -> tuple[float, float] | None:
        self.calls += 1
        return self.table.get(normalize_place_text(text))


class HttpGeocoder:
    """Minimal HTTP geocoding client: GET <url>?q=<text>[&key=<key>].

    Accepts either a flat {"lat": .., "lon": ..} response or the common
    nested results[0].geometry.location {lat, lng} shape. Any transport
    or parse failure raises GeocodeError.
    """

    def __init__(self, url: str, key: str | None = None, timeout: float = 10.0):
        self.url = url
        self.key = key
        self.timeout = timeout

    def geocode(self, text: str) -> tuple[float, float] | None:
        params = {"q": text}
        if self.key:
            params["key"] = self.key
        sep = "&" if "?" in self.url else "?"
        full = self.url + sep + urllib.parse.urlencode(params)
        try:
            with urllib.request.urlopen(full, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except Exception as exc:
            raise GeocodeError(f"geocoder request failed: {exc}") from exc
        try:
            if payload is None:
                return None
            if "lat" in payload:
                return float(payload["lat"]), float(payload.get("lon", payload.get("lng")))
            results = payload.get("results") or []
            if not results:
                return None
            loc = results[0]["geometry"]["location"]
            return float(loc["lat"]), float(loc["lng"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GeocodeError(f"unrecognized geocoder response: {exc}") from exc


def resolve_location(
    post: PostRecord,
    index: SpatialIndex,
    gazetteer: Gazetteer,
    cache: GeocodeCache | None = None,
    provider=None,
) -> LocationAssignment:
    """Assign a post to a district, trying evidence in priority order.

    1. Device coordinates inside a district -> geotag-pip.
    2. District name mentions in the text -> text-mention (first mention,
       flagged ambiguous when several distinct districts appear).
    3. City-level text with a provider available -> geocode the
       normalized text, then point-in-polygon -> geocoded.
    4. Otherwise unresolved. Provider failures degrade to unresolved and
       are recorded in the assignment note, never raised.
    """
    if post.latitude is not None and post.longitude is not None:
        district = locate_point(index, post.latitude, post.longitude)
        if district is not None:
            return LocationAssignment(district, "geotag-pip")

    result = match_mentions(post.text, gazetteer)
    if result.mentions:
        distinct = set(result.mentions)
        return LocationAssignment(
            result.mentions[0], "text-mention",
            ambiguous=len(distinct) >= 2, mentions=result.mentions)

    if result.city_level and provider is not None:
        query = normalize_place_text(post.text)
        point = cache.get(query) if cache is not None else None
        if point is None:
            try:
                resolved = provider.geocode(query)
            except GeocodeError:
                return LocationAssignment(None, "unresolved", note="geocoder-error")
            if cache is not None:
                if resolved is None:
                    cache.put_no_result(query)
                else:
                    cache.put(query, resolved[0], resolved[1])
            point = resolved if resolved is not None else "no-result"
        if point != "no-result":
            district = locate_point(index, point[0], point[1])
            if district is not None:
                return LocationAssignment(district, "geocoded")
            return LocationAssignment(None, "unresolved",
                                      note="geocoded-outside-districts")
        return LocationAssignment(None, "unresolved", note="geocoder-no-result")

    return LocationAssignment(None, "unresolved")
