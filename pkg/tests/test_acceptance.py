"""Acceptance gate: one test per primary criterion, at desk scale.

Run `pytest tests/test_acceptance.py -v` for one pass/fail line per
criterion. Randomized checks use fixed seeds so failures reproduce.
"""
from __future__ import annotations

import io
import json
import random
import threading
import time
import urllib.request
from datetime import datetime, timedelta, timezone

import pytest

from vcfat.analytics import (
    Series,
    build_snapshot,
    colocate,
    cumulative,
    load_snapshot,
    query_counts,
    spearman,
    timeline,
)
from vcfat.cli import main as cli_main
from vcfat.config import IngestConfig
from vcfat.ingest import filter_minor_traffic, parse_crime_csv, parse_posts
from vcfat.locate import (
    GeocodeCache,
    StubGeocoder,
    build_spatial_index,
    locate_point,
)
from vcfat.model import (
    AnalyticsQuery,
    CrimeIncident,
    LocationAssignment,
    Neighborhood,
    NeighborhoodSet,
    PostRecord,
)
from vcfat.pipeline import run_ingest
from vcfat.service import (
    ServiceState,
    make_server,
    meta_body,
    timeline_body,
)
from vcfat.timebuckets import bucket_of

from conftest import CRIME_CSV, STUB_TABLE
from oracles import (
    bucket_key_oracle,
    closed_form_spearman,
    definitional_spearman,
    on_any_edge,
    raycast_contains,
    scan_aggregate,
    scan_timeline,
)


def utc(*args):
    return datetime(*args, tzinfo=timezone.utc)


BASE = utc(2018, 1, 1)


# ---------------------------------------------------------------------------
# Synthetic dataset generation shared by the aggregation criteria

def synth_dataset(seed: int):
    """One randomized dataset: materialized records plus raw scan tuples."""
    rng = random.Random(seed * 7919 + 13)
    n_districts = rng.randint(2, 10)
    n_categories = rng.randint(1, 8)
    districts = [f"d{k:02d}" for k in range(n_districts)]
    categories = [f"cat{k}" for k in range(n_categories)]

    if seed == 0:
        n_records, window_days = 10_000, 365       # exercise the size bound
    elif seed % 10 == 5:
        n_records, window_days = rng.randint(100, 400), rng.randint(700, 1100)
    else:
        n_records, window_days = rng.randint(50, 600), rng.randint(60, 400)

    crimes, posts = [], []
    crime_tuples, post_tuples = [], []
    for i in range(n_records):
        when = BASE + timedelta(minutes=rng.randrange(window_days * 24 * 60))
        district = None if rng.random() < 0.1 else rng.choice(districts)
        if rng.random() < 0.5:
            category = rng.choice(categories)
            crimes.append(CrimeIncident(
                incident_id=f"c{i}", occurred_at=when, reported_at=when,
                category=category, raw_category=category, neighborhood=district,
                police_district="", latitude=0.0, longitude=0.0))
            crime_tuples.append((district, category, when))
        else:
            category = None if rng.random() < 0.2 else rng.choice(categories)
            location = (LocationAssignment(district, "geotag-pip")
                        if district else LocationAssignment(None, "unresolved"))
            posts.append(PostRecord(
                post_id=f"p{i}", created_at=when, text="",
                location=location, category=category))
            post_tuples.append((district, category, when))

    snapshot = build_snapshot(crimes, posts)
    return {
        "rng": rng,
        "categories": categories,
        "window_days": window_days,
        "snapshot": snapshot,
        "tuples": {"crime": crime_tuples, "post": post_tuples},
    }


def random_ranges(data):
    rng, window = data["rng"], data["window_days"]
    full = (BASE, BASE + timedelta(days=window))
    d0 = rng.randrange(window)
    length = rng.randint(1, window - d0) if d0 < window else 1
    sub = (BASE + timedelta(days=d0), BASE + timedelta(days=d0 + length))
    return [full, sub]


def test_criterion_aggregation_oracle():
    """query_counts and timeline equal a naive per-record scan, exactly."""
    started = time.monotonic()
    queries_checked = 0
    for seed in range(100):
        data = synth_dataset(seed)
        snapshot = data["snapshot"]
        rng = data["rng"]
        category_grid = [None, "uncategorized"] + rng.sample(
            data["categories"], k=min(2, len(data["categories"])))
        ranges = random_ranges(data)

        for source in ("crime", "post"):
            tuples = data["tuples"][source]
            for from_, to in ranges:
                for category in category_grid:
                    q = AnalyticsQuery(source=source, from_=from_, to=to,
                                       granularity="day", category=category)
                    got = query_counts(snapshot, q)
                    want = scan_aggregate(tuples, from_, to, category)
                    assert {d: n for d, n in got.items() if n} == want
                    queries_checked += 1
                for granularity in ("day", "week", "month", "year"):
                    for category in (None, category_grid[2]
                                     if len(category_grid) > 2 else None):
                        q = AnalyticsQuery(source=source, from_=from_, to=to,
                                           granularity=granularity,
                                           category=category)
                        (series,) = timeline(snapshot, q)
                        want = scan_timeline(tuples, from_, to, granularity,
                                             category)
                        got = dict(series.points)
                        assert {k: v for k, v in got.items() if v} == want
                        assert all(k in got for k in want)
                        queries_checked += 1
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"aggregation oracle took {elapsed:.1f}s"
    print(f"\nACCEPTANCE aggregation-oracle: PASS "
          f"({queries_checked} queries over 100 datasets in {elapsed:.1f}s)")


def _square(lon0, lat0=0.0, size=1.0):
    return ((
        (lon0, lat0), (lon0 + size, lat0), (lon0 + size, lat0 + size),
        (lon0, lat0 + size), (lon0, lat0),
    ),)


PIP_FIXTURES = {
    "adjacent-squares": NeighborhoodSet([
        Neighborhood("a", "A", (_square(0.0),)),
        Neighborhood("b", "B", (_square(1.0),)),
        Neighborhood("c", "C", (_square(2.0),)),
    ]),
    "concave-and-triangle": NeighborhoodSet([
        Neighborhood("ell", "Ell", (((
            (0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0),
            (1.0, 2.0), (0.0, 2.0), (0.0, 0.0)),),)),
        Neighborhood("tri", "Tri", (((
            (3.0, 0.0), (4.0, 0.0), (3.5, 1.5), (3.0, 0.0)),),)),
    ]),
    "donut-and-twin": NeighborhoodSet([
        Neighborhood("donut", "Donut", ((
            ((0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0), (0.0, 0.0)),
            ((1.0, 1.0), (3.0, 1.0), (3.0, 3.0), (1.0, 3.0), (1.0, 1.0)),
        ),)),
        Neighborhood("twin", "Twin", (
            _square(5.0, 0.0), _square(5.0, 3.0),
        )),
    ]),
}


def test_criterion_point_in_polygon_oracle():
    """locate_point agrees with independent even-odd ray casting."""
    total_checked = 0
    for name, fixture in PIP_FIXTURES.items():
        index = build_spatial_index(fixture)
        districts = list(fixture)
        min_lon = min(n.bounding_box()[0] for n in districts) - 0.5
        max_lon = max(n.bounding_box()[2] for n in districts) + 0.5
        min_lat = min(n.bounding_box()[1] for n in districts) - 0.5
        max_lat = max(n.bounding_box()[3] for n in districts) + 0.5
        rng = random.Random(hash(name) & 0xFFFF)
        checked = 0
        attempts = 0
        while checked < 1000 and attempts < 5000:
            attempts += 1
            lat = rng.uniform(min_lat, max_lat)
            lon = rng.uniform(min_lon, max_lon)
            if any(on_any_edge(n.polygons, lat, lon) for n in districts):
                continue
            expected = [n.id for n in districts
                        if raycast_contains(n.polygons, lat, lon)]
            assert len(expected) <= 1, f"{name}: overlapping fixture polygons"
            assert locate_point(index, lat, lon) == \
                (expected[0] if expected else None), (name, lat, lon)
            checked += 1
        assert checked >= 1000
        total_checked += checked

    # Boundary points follow the smallest-id rule exactly.
    squares = build_spatial_index(PIP_FIXTURES["adjacent-squares"])
    assert locate_point(squares, 0.5, 1.0) == "a"   # a|b shared edge
    assert locate_point(squares, 0.5, 2.0) == "b"   # b|c shared edge
    assert locate_point(squares, 1.0, 1.0) == "a"   # shared corner
    assert locate_point(squares, 0.0, 0.0) == "a"   # outer corner
    assert locate_point(squares, 0.0, 3.0) == "c"   # c-only boundary
    print(f"\nACCEPTANCE point-in-polygon-oracle: PASS "
          f"({total_checked} non-boundary points + boundary cases)")


def test_criterion_calendar_oracle():
    """bucket_of matches the ISO-8601 oracle on 1,000 random instants."""
    rng = random.Random(8601)
    span = utc(2031, 1, 1) - utc(2015, 1, 1)
    for _ in range(1000):
        t = utc(2015, 1, 1) + timedelta(
            seconds=rng.randrange(int(span.total_seconds())))
        for granularity in ("day", "week", "month", "year"):
            assert bucket_of(t, granularity) == bucket_key_oracle(t, granularity)

    year_boundary_cases = {
        utc(2019, 12, 31): "2020-W01",
        utc(2020, 1, 1): "2020-W01",
        utc(2021, 1, 1): "2020-W53",
        utc(2016, 1, 1): "2015-W53",
        utc(2017, 1, 1): "2016-W52",
        utc(2015, 12, 28): "2015-W53",
    }
    for t, expected in year_boundary_cases.items():
        assert bucket_of(t, "week") == expected
        assert bucket_key_oracle(t, "week") == expected
    print("\nACCEPTANCE calendar-oracle: PASS (1000 instants + boundary weeks)")


def test_criterion_rollup_identities():
    """day->month->year consistency and category partition, exactly."""
    for seed in range(12):
        data = synth_dataset(seed + 500)
        snapshot = data["snapshot"]
        from_, to = BASE, BASE + timedelta(days=data["window_days"])
        for source in ("crime", "post"):
            series = {}
            for granularity in ("day", "month", "year"):
                (series[granularity],) = timeline(snapshot, AnalyticsQuery(
                    source=source, from_=from_, to=to, granularity=granularity))
            months = dict(series["month"].points)
            for month_key, month_count in months.items():
                day_sum = sum(v for k, v in series["day"].points
                              if k.startswith(month_key))
                assert day_sum == month_count
            for year_key, year_count in series["year"].points:
                month_sum = sum(v for k, v in months.items()
                                if k.startswith(year_key))
                assert month_sum == year_count

            unfiltered = query_counts(snapshot, AnalyticsQuery(
                source=source, from_=from_, to=to, granularity="day"))
            summed = {d: 0 for d in unfiltered}
            for category, _ in snapshot.categories:
                part = query_counts(snapshot, AnalyticsQuery(
                    source=source, from_=from_, to=to, granularity="day",
                    category=category))
                for d, n in part.items():
                    summed[d] += n
            assert summed == unfiltered
    print("\nACCEPTANCE rollup-identities: PASS (12 datasets)")


def test_criterion_cumulative():
    """Prefix-sum contract on the stated example and random series."""
    example = Series("crime", "year", (("2018", 3), ("2019", 0), ("2020", 2)))
    assert [v for _, v in cumulative(example).points] == [3, 3, 5]

    rng = random.Random(1234)
    for _ in range(300):
        counts = [rng.randrange(100) for _ in range(rng.randrange(50))]
        series = Series("post", "day",
                        tuple((f"k{i:04d}", v) for i, v in enumerate(counts)))
        out = [v for _, v in cumulative(series).points]
        assert out == [sum(counts[:i + 1]) for i in range(len(counts))]
        assert out == sorted(out)
        if counts:
            assert out[-1] == sum(counts)
    print("\nACCEPTANCE cumulative: PASS (300 random series)")


def test_criterion_spearman():
    """Closed form on 1,000 permutations; definitional oracle under ties."""
    rng = random.Random(555)
    for _ in range(1000):
        n = rng.randint(2, 40)
        xs = list(range(n))
        ys = list(range(n))
        rng.shuffle(ys)
        assert abs(spearman(xs, ys) - closed_form_spearman(xs, ys)) <= 1e-9

    tie_checks = 0
    while tie_checks < 300:
        n = rng.randint(3, 30)
        xs = [rng.randrange(6) for _ in range(n)]
        ys = [rng.randrange(6) for _ in range(n)]
        if len(set(xs)) < 2 or len(set(ys)) < 2:
            continue
        assert abs(spearman(xs, ys) - definitional_spearman(xs, ys)) <= 1e-9
        tie_checks += 1
    print("\nACCEPTANCE spearman: PASS (1000 permutations + 300 tied vectors)")


CORRUPTED_CSV = CRIME_CSV + (
    "c11,not a date,also not,Assault,Alpha Heights,Northern,0.5,0.5,Open\n"
    "c12,2018-01-01T00:00:00Z,2018-01-01T01:00:00Z,,Alpha Heights,Northern,0.5,0.5,Open\n"
    "c13,2018-01-01T00:00:00Z,2018-01-01T01:00:00Z,Assault,Alpha Heights,Northern,91.0,0.5,Open\n"
    'c14,"2018-01-01T00:00:00Z,mangled\n'
)

CORRUPTED_NDJSON = "\n".join([
    '{"id": "x1", "created_at": "2020-01-01T00:00:00Z", "text": "theft downtown"}',
    "{broken json",
    '{"id": "", "created_at": "2020-01-01T00:00:00Z", "text": "no id"}',
    '{"id": "x2", "created_at": "whenever", "text": "bad clock"}',
    '["not", "an", "object"]',
    '{"id": "x3", "created_at": "2020-01-01T00:00:00Z"}',
    '{"id": "x4", "created_at": "2020-01-01T00:00:00Z", "text": "ok", "lat": 200, "lon": 0}',
    "",
    '{"id": "x5", "created_at": "2020-02-02T02:02:02Z", "text": "mugged in SF"}',
]) + "\n"


def test_criterion_ingest_conservation():
    """rows_read = accepted + rejected on clean and corrupted inputs;
    the traffic filter removes exactly the matching rows."""
    config = IngestConfig()

    for text in (CRIME_CSV, CORRUPTED_CSV):
        incidents, report = parse_crime_csv(
            io.StringIO(text), config.column_map,
            category_normalization=config.category_normalization,
            registry=config.registry())
        assert report.rows_read == report.rows_accepted + report.rows_rejected
        assert sum(report.rejection_reasons.values()) == report.rows_rejected
        assert len(incidents) == report.rows_accepted

    _, corrupted_report = parse_crime_csv(
        io.StringIO(CORRUPTED_CSV), config.column_map,
        category_normalization=config.category_normalization,
        registry=config.registry())
    # c11 bad clock, c12 empty category, c13 lat out of range, c14's
    # dangling quote swallows the rest of the row (short row, no coords).
    assert corrupted_report.rejection_reasons == {
        "missing-coordinate": 2, "bad-timestamp": 1, "missing-category": 1,
        "bad-coordinate": 1}

    posts, report = parse_posts(io.StringIO(CORRUPTED_NDJSON))
    assert report.rows_read == 8  # the blank line is skipped silently
    assert report.rows_accepted == len(posts) == 2
    assert report.rows_read == report.rows_accepted + report.rows_rejected
    assert sum(report.rejection_reasons.values()) == report.rows_rejected
    assert report.rejection_reasons == {
        "bad-json": 2, "missing-id": 1, "bad-timestamp": 1,
        "empty-record": 1, "bad-coordinate": 1}

    # Traffic filter: exactly the exclusion-matching rows go.
    traffic_csv = CRIME_CSV.replace(
        "c3,2019-01-02T12:00:00Z,2019-01-02T12:30:00Z,Robbery",
        "c3,2019-01-02T12:00:00Z,2019-01-02T12:30:00Z,Traffic Violation Arrest"
    ).replace(
        "c7,2021-08-09T14:00:00Z,2021-08-09T15:00:00Z,Larceny Theft",
        "c7,2021-08-09T14:00:00Z,2021-08-09T15:00:00Z,Traffic Collision"
    )
    incidents, _ = parse_crime_csv(
        io.StringIO(traffic_csv), config.column_map,
        category_normalization=config.category_normalization,
        registry=config.registry())
    matching = [i.incident_id for i in incidents
                if any(p in i.raw_category.lower()
                       for p in config.traffic_exclusions)]
    retained, removed = filter_minor_traffic(incidents, config.traffic_exclusions)
    assert removed == len(matching) == 2
    assert [i.incident_id for i in retained] == \
        [i.incident_id for i in incidents if i.incident_id not in matching]
    print("\nACCEPTANCE ingest-conservation: PASS")


def test_criterion_geocode_cache(input_files, tmp_path):
    """Second pass: zero provider calls, byte-identical assignments."""
    cache_path = tmp_path / "cache.tsv"

    def one_pass():
        provider = StubGeocoder(STUB_TABLE)
        cache = GeocodeCache.load(cache_path)
        result = run_ingest(input_files["crimes"], input_files["posts"],
                            input_files["districts"], IngestConfig(),
                            geocoder=provider, cache=cache)
        cache.save(cache_path)
        blob = json.dumps([p.to_json() for p in result.posts],
                          sort_keys=True).encode()
        return provider.calls, blob

    first_calls, first_blob = one_pass()
    second_calls, second_blob = one_pass()
    assert first_calls == 1
    assert second_calls == 0
    assert first_blob == second_blob
    print("\nACCEPTANCE geocode-cache: PASS")


@pytest.fixture
def cli_snapshot(input_files, capsys):
    cache = GeocodeCache()
    for text, (lat, lon) in STUB_TABLE.items():
        cache.put(text, lat, lon)
    cache_path = input_files["dir"] / "cache.tsv"
    cache.save(cache_path)
    store = input_files["dir"] / "store"
    snap = input_files["dir"] / "snapshot.json"
    assert cli_main(["ingest", "--crimes", str(input_files["crimes"]),
                     "--posts", str(input_files["posts"]),
                     "--districts", str(input_files["districts"]),
                     "--stub-geocoder", "--geocode-cache", str(cache_path),
                     "--out", str(store)]) == 0
    assert cli_main(["build", "--store", str(store), "--out", str(snap)]) == 0
    capsys.readouterr()
    return {"store": store, "snapshot": snap}


def test_criterion_api_engine_cli_transparency(cli_snapshot, capsys):
    """Endpoint bodies equal engine results; export equals endpoints;
    rebuild on unchanged inputs reproduces the build id."""
    snapshot = load_snapshot(cli_snapshot["snapshot"])
    state = ServiceState(snapshot)
    httpd = make_server(state, "127.0.0.1", 0)
    thread = threading.Thread(
        target=lambda: httpd.serve_forever(poll_interval=0.05), daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    params = "source=crime&granularity=year&from=2018-01-01&to=2023-01-01"
    q = AnalyticsQuery(source="crime", from_=utc(2018, 1, 1),
                       to=utc(2023, 1, 1), granularity="year")
    try:
        def fetch(path):
            with urllib.request.urlopen(base + path) as resp:
                return resp.read().decode()

        # Endpoint body == engine serialization, for every endpoint.
        assert json.loads(fetch("/api/meta")) == meta_body(snapshot)
        assert json.loads(fetch(f"/api/aggregate?{params}")) == \
            query_counts(snapshot, q)
        assert json.loads(fetch(f"/api/timeline?{params}")) == \
            [s.to_json() for s in timeline(snapshot, q)]
        assert json.loads(fetch(f"/api/timeline?{params}&cumulative=true")) == \
            timeline_body(snapshot, q, cumulative_mode=True)
        assert json.loads(fetch(
            "/api/colocate?granularity=year&from=2018-01-01&to=2023-01-01")) == \
            colocate(snapshot, AnalyticsQuery(
                source="both", from_=utc(2018, 1, 1), to=utc(2023, 1, 1),
                granularity="year")).to_json()
        assert json.loads(fetch("/api/neighborhoods")) == \
            snapshot.neighborhoods_geojson

        # CLI export --json == endpoint body, byte-identical JSON.
        export_args = ["export", "--snapshot", str(cli_snapshot["snapshot"]),
                       "--source", "crime", "--granularity", "year",
                       "--from", "2018-01-01", "--to", "2023-01-01", "--json"]
        assert cli_main(export_args[:1] + ["--kind", "aggregate"]
                        + export_args[1:]) == 0
        assert capsys.readouterr().out.strip() == \
            fetch(f"/api/aggregate?{params}").strip()
        assert cli_main(export_args[:1] + ["--kind", "timeline"]
                        + export_args[1:]) == 0
        assert capsys.readouterr().out.strip() == \
            fetch(f"/api/timeline?{params}").strip()
        assert cli_main(["export", "--snapshot", str(cli_snapshot["snapshot"]),
                         "--kind", "colocate", "--granularity", "year",
                         "--from", "2018-01-01", "--to", "2023-01-01",
                         "--json"]) == 0
        assert capsys.readouterr().out.strip() == fetch(
            "/api/colocate?granularity=year&from=2018-01-01&to=2023-01-01").strip()
    finally:
        httpd.shutdown()
        httpd.server_close()

    # Rebuild on unchanged inputs reproduces the identical build id.
    rebuilt_path = cli_snapshot["snapshot"].parent / "rebuilt.json"
    assert cli_main(["build", "--store", str(cli_snapshot["store"]),
                     "--out", str(rebuilt_path), "--json"]) == 0
    rebuilt = json.loads(capsys.readouterr().out)
    assert rebuilt["build_id"] == snapshot.build_id
    print("\nACCEPTANCE api-engine-cli-transparency: PASS")
