"""Declarative ingest configuration.

One JSON file drives everything data-dependent about ingestion: the CSV
column map, the minor-traffic exclusion list, the category registry and
raw-category normalization table, the keyword lexicon, and the city
aliases used for text mention matching. The defaults target the San
Francisco open-data incident export; every field is overridable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .model import Category, CategoryRegistry, IngestError

#: Canonical record fields every crime CSV must map onto.
CANONICAL_CRIME_FIELDS = (
    "incident_id",
    "occurred_at",
    "reported_at",
    "category",
    "neighborhood",
    "police_district",
    "latitude",
    "longitude",
)

DEFAULT_COLUMN_MAP = {
    "Incident ID": "incident_id",
    "Incident Datetime": "occurred_at",
    "Report Datetime": "reported_at",
    "Incident Category": "category",
    "Analysis Neighborhood": "neighborhood",
    "Police District": "police_district",
    "Latitude": "latitude",
    "Longitude": "longitude",
}

DEFAULT_TRAFFIC_EXCLUSIONS = ["traffic violation", "traffic collision", "citation"]

DEFAULT_CATEGORIES = [
    ("arson", "Arson"),
    ("assault", "Assault"),
    ("burglary", "Burglary"),
    ("fraud", "Fraud"),
    ("motor-vehicle-theft", "Motor Vehicle Theft"),
    ("robbery", "Robbery"),
    ("theft", "Theft"),
]

#: Raw category text (lowercased) -> canonical category id, for source
#: spellings that do not slugify onto a registry id.
DEFAULT_CATEGORY_NORMALIZATION = {
    "larceny theft": "theft",
    "larceny - theft": "theft",
    "motor vehicle theft": "motor-vehicle-theft",
    "motor vehicle theft?": "motor-vehicle-theft",
    "car theft": "motor-vehicle-theft",
    "vehicle theft": "motor-vehicle-theft",
    "fraud - identity theft": "fraud",
}

#: Priority-ordered keyword lexicon: earlier entries win when a post
#: matches phrases from several categories. More specific phrasings come
#: before generic ones so "car stolen" lands on motor-vehicle-theft, not
#: theft.
DEFAULT_LEXICON = [
    ("motor-vehicle-theft", ["car stolen", "stolen car", "car theft",
                             "carjacking", "carjacked", "auto theft",
                             "vehicle stolen"]),
    ("robbery", ["robbery", "robbed", "robber", "mugging", "mugged",
                 "armed robbery", "holdup"]),
    ("burglary", ["burglary", "burglar", "break in", "broke in",
                  "broke into", "breaking in"]),
    ("arson", ["arson", "set fire", "set on fire", "firebomb"]),
    ("assault", ["assault", "assaulted", "attacked", "stabbing", "stabbed",
                 "beaten up", "battery"]),
    ("fraud", ["fraud", "scam", "scammed", "scammer", "swindled",
               "identity theft", "phishing"]),
    ("theft", ["theft", "stole", "stolen", "pickpocket", "shoplifting",
               "shoplifter", "larceny"]),
]

DEFAULT_CITY_ALIASES = ["san francisco", "san fran", "sf", "sfo", "frisco"]


@dataclass
class IngestConfig:
    column_map: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COLUMN_MAP))
    traffic_exclusions: list[str] = field(
        default_factory=lambda: list(DEFAULT_TRAFFIC_EXCLUSIONS))
    categories: list[tuple[str, str]] = field(
        default_factory=lambda: list(DEFAULT_CATEGORIES))
    category_normalization: dict[str, str] = field(
        default_factory=lambda: dict(DEFAULT_CATEGORY_NORMALIZATION))
    lexicon: list[tuple[str, list[str]]] = field(
        default_factory=lambda: [(c, list(p)) for c, p in DEFAULT_LEXICON])
    city_aliases: list[str] = field(default_factory=lambda: list(DEFAULT_CITY_ALIASES))

    def registry(self) -> CategoryRegistry:
        return CategoryRegistry([Category(cid, name) for cid, name in self.categories])

    def to_json(self) -> dict:
        return {
            "column_map": self.column_map,
            "traffic_exclusions": self.traffic_exclusions,
            "categories": [{"id": cid, "display_name": name}
                           for cid, name in self.categories],
            "category_normalization": self.category_normalization,
            "lexicon": [{"category": cid, "phrases": phrases}
                        for cid, phrases in self.lexicon],
            "city_aliases": self.city_aliases,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "IngestConfig":
        cfg = cls()
        if "column_map" in obj:
            cfg.column_map = dict(obj["column_map"])
        if "traffic_exclusions" in obj:
            cfg.traffic_exclusions = list(obj["traffic_exclusions"])
        if "categories" in obj:
            cfg.categories = [(c["id"], c["display_name"]) for c in obj["categories"]]
        if "category_normalization" in obj:
            cfg.category_normalization = {
                k.lower(): v for k, v in obj["category_normalization"].items()}
        if "lexicon" in obj:
            cfg.lexicon = [(e["category"], [p.lower() for p in e["phrases"]])
                           for e in obj["lexicon"]]
        if "city_aliases" in obj:
            cfg.city_aliases = [a.lower() for a in obj["city_aliases"]]
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "IngestConfig":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(obj)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n",
                              encoding="utf-8")

    def validate(self) -> None:
        mapped = set(self.column_map.values())
        missing = [f for f in CANONICAL_CRIME_FIELDS if f not in mapped]
        if missing:
            raise IngestError(f"column_map misses canonical fields: {missing}")
        registry = self.registry()
        for raw, cid in self.category_normalization.items():
            if cid not in registry:
                raise IngestError(
                    f"normalization target {cid!r} (for {raw!r}) not in registry")
        seen_phrases: dict[str, str] = {}
        for cid, phrases in self.lexicon:
            if cid not in registry:
                raise IngestError(f"lexicon category {cid!r} not in registry")
            for phrase in phrases:
                if phrase != phrase.lower():
                    raise IngestError(f"lexicon phrase not lowercase: {phrase!r}")
                if phrase in seen_phrases and seen_phrases[phrase] != cid:
                    raise IngestError(
                        f"phrase {phrase!r} appears under both "
                        f"{seen_phrases[phrase]!r} and {cid!r}")
                seen_phrases[phrase] = cid
