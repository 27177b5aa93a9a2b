"""Shared fixtures: a three-district toy city with crimes and posts.

The districts are adjacent unit squares (lon 0..3, lat 0..1) named
Alpha Heights, Bayview, and Casterly, so ids sort a < b < c and the
squares share vertical boundary edges for tie-break tests.
"""
from __future__ import annotations

import io
import json
import textwrap

import pytest

from vcfat.config import IngestConfig
from vcfat.ingest import parse_neighborhoods
from vcfat.locate import StubGeocoder, build_spatial_index


def _square(name: str, lon0: float) -> dict:
    ring = [[lon0, 0.0], [lon0 + 1.0, 0.0], [lon0 + 1.0, 1.0],
            [lon0, 1.0], [lon0, 0.0]]
    return {
        "type": "Feature",
        "properties": {"name": name},
        "geometry": {"type": "Polygon", "coordinates": [ring]},
    }


DISTRICTS_GEOJSON = json.dumps({
    "type": "FeatureCollection",
    "features": [
        _square("Alpha Heights", 0.0),
        _square("Bayview", 1.0),
        _square("Casterly", 2.0),
    ],
})

CRIME_CSV = textwrap.dedent("""\
    Incident ID,Incident Datetime,Report Datetime,Incident Category,Analysis Neighborhood,Police District,Latitude,Longitude,Resolution
    c1,2018-03-05T02:00:00Z,2018-03-05T03:00:00Z,Assault,Alpha Heights,Northern,0.5,0.5,Open
    c2,2018/07/14 10:30:00 PM,2018/07/14 11:00:00 PM,Larceny Theft,,Northern,0.25,1.5,Open
    c3,2019-01-02T12:00:00Z,2019-01-02T12:30:00Z,Robbery,Bayview,Southern,0.75,1.25,Open
    c4,2019-06-15T08:00:00Z,2019-06-15T07:00:00Z,Motor Vehicle Theft,Casterly,Southern,0.5,2.5,Open
    c5,2020-02-29T23:59:59Z,2020-03-01T00:10:00Z,Assault,,Central,0.9,0.1,Open
    c6,2020-11-03T00:00:00Z,2020-11-03T01:00:00Z,Vandalism,Alpha Heights,Central,0.2,0.8,Open
    c7,2021-08-09T14:00:00Z,2021-08-09T15:00:00Z,Larceny Theft,Casterly,Park,0.33,2.9,Open
    c8,2022-12-11T21:00:00Z,2022-12-11T22:00:00Z,Robbery,Bayview,Park,0.6,1.9,Open
    c9,2022-01-01T00:00:00Z,2022-01-01T00:30:00Z,Assault,Unknown Place,Mission,0.5,0.6,Open
    c10,2018-05-05T05:00:00Z,2018-05-05T06:00:00Z,Assault,Alpha Heights,Northern,,0.5,Open
    """)

POSTS_NDJSON = "\n".join([
    json.dumps({"id": "p1", "created_at": "2018-04-01T10:00:00Z",
                "text": "Car stolen near 5th!", "lat": 0.5, "lon": 0.5}),
    json.dumps({"id": "p2", "created_at": "2019-02-10T20:00:00Z",
                "text": "Robbery in Bayview tonight"}),
    json.dumps({"id": "p3", "created_at": "2020-06-01T12:00:00Z",
                "text": "From Alpha Heights to Bayview, stay safe"}),
    json.dumps({"id": "p4", "created_at": "2021-03-15T08:30:00Z",
                "text": "San Francisco is wild, someone got mugged"}),
    json.dumps({"id": "p5", "created_at": "2021-07-04T23:00:00Z",
                "text": "assault downtown", "lat": 5.0, "lon": 5.0}),
    json.dumps({"id": "p6", "created_at": "2022-11-30T17:45:00Z",
                "text": "Beautiful sunset", "lat": 0.5, "lon": 1.5}),
]) + "\n"

#: Stub geocoder table resolving the one city-level fixture post into
#: Casterly (lat 0.5, lon 2.5).
STUB_TABLE = {"san francisco is wild, someone got mugged": (0.5, 2.5)}


@pytest.fixture
def config():
    return IngestConfig()


@pytest.fixture
def neighborhoods():
    return parse_neighborhoods(io.BytesIO(DISTRICTS_GEOJSON.encode()))


@pytest.fixture
def spatial_index(neighborhoods):
    return build_spatial_index(neighborhoods)


@pytest.fixture
def stub_geocoder():
    return StubGeocoder(STUB_TABLE)


@pytest.fixture
def input_files(tmp_path):
    """The three raw input files on disk, ready for the pipeline/CLI."""
    crimes = tmp_path / "crimes.csv"
    posts = tmp_path / "posts.ndjson"
    districts = tmp_path / "districts.geojson"
    crimes.write_text(CRIME_CSV, encoding="utf-8")
    posts.write_text(POSTS_NDJSON, encoding="utf-8")
    districts.write_text(DISTRICTS_GEOJSON, encoding="utf-8")
    return {"crimes": crimes, "posts": posts, "districts": districts,
            "dir": tmp_path}
