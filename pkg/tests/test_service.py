import json
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import pytest

from vcfat.analytics import build_snapshot, load_snapshot, save_snapshot
from vcfat.config import IngestConfig
from vcfat.model import AnalyticsQuery
from vcfat.pipeline import run_ingest
from vcfat.service import (
    ServiceState,
    aggregate_body,
    colocate_body,
    make_server,
    timeline_body,
)

from conftest import STUB_TABLE
from vcfat.locate import StubGeocoder


@pytest.fixture
def snapshot(input_files):
    result = run_ingest(input_files["crimes"], input_files["posts"],
                        input_files["districts"], IngestConfig(),
                        geocoder=StubGeocoder(STUB_TABLE))
    return build_snapshot(result.crimes, result.posts,
                          result.neighborhoods, result.registry)


@pytest.fixture
def server(snapshot, tmp_path, monkeypatch):
    path = tmp_path / "snapshot.json"
    save_snapshot(snapshot, path)
    state = ServiceState(load_snapshot(path),
                         reloader=lambda: load_snapshot(path),
                         admin_token="sekrit")
    httpd = make_server(state, "127.0.0.1", 0)
    thread = threading.Thread(
        target=lambda: httpd.serve_forever(poll_interval=0.05), daemon=True)
    thread.start()
    port = httpd.server_address[1]
    yield {"url": f"http://127.0.0.1:{port}", "state": state, "path": path,
           "snapshot": snapshot}
    httpd.shutdown()
    httpd.server_close()


def get(url):
    try:
        with urllib.request.urlopen(url) as resp:
            return resp.status, dict(resp.headers), resp.read()
    except urllib.error.HTTPError as err:
        return err.code, dict(err.headers), err.read()


def get_json(url):
    status, headers, body = get(url)
    return status, headers, json.loads(body)


FULL = "from=2018-01-01&to=2023-01-01"


def query(**kw):
    return AnalyticsQuery(
        source=kw.get("source", "crime"),
        from_=datetime(2018, 1, 1, tzinfo=timezone.utc),
        to=datetime(2023, 1, 1, tzinfo=timezone.utc),
        granularity=kw.get("granularity", "year"),
        category=kw.get("category"),
    )


def test_meta_reports_fixture_tallies(server):
    status, headers, body = get_json(server["url"] + "/api/meta")
    assert status == 200
    assert body["sources"] == {"crime": 9, "post": 6}
    assert body["build_id"] == server["snapshot"].build_id
    assert headers["X-Build-Id"] == server["snapshot"].build_id
    assert body["granularities"] == ["day", "week", "month", "year"]
    assert {"id": "uncategorized", "display_name": "Uncategorized"} \
        in body["categories"]


def test_aggregate_equals_engine(server):
    url = server["url"] + f"/api/aggregate?source=crime&granularity=year&{FULL}"
    status, _, body = get_json(url)
    assert status == 200
    assert body == aggregate_body(server["snapshot"], query())


def test_aggregate_with_category_equals_engine(server):
    url = (server["url"]
           + f"/api/aggregate?source=post&granularity=year&{FULL}&category=robbery")
    _, _, body = get_json(url)
    assert body == aggregate_body(server["snapshot"],
                                  query(source="post", category="robbery"))


def test_aggregate_unknown_category_is_400(server):
    url = server["url"] + f"/api/aggregate?source=crime&{FULL}&category=nonsense"
    status, _, body = get_json(url)
    assert status == 400
    assert body["code"] == "unknown-category"


def test_aggregate_missing_source_is_400(server):
    status, _, body = get_json(server["url"] + f"/api/aggregate?{FULL}")
    assert status == 400
    assert body["code"] == "unknown-source"


def test_invalid_range_is_400(server):
    url = server["url"] + "/api/aggregate?source=crime&from=2020-01-01&to=2019-01-01"
    status, _, body = get_json(url)
    assert status == 400
    assert body["code"] == "invalid-range"
    url = server["url"] + "/api/aggregate?source=crime&from=junk&to=2019-01-01"
    status, _, body = get_json(url)
    assert status == 400
    assert body["code"] == "invalid-range"


def test_timeline_equals_engine(server):
    url = (server["url"]
           + f"/api/timeline?source=both&granularity=year&{FULL}")
    _, _, body = get_json(url)
    assert body == timeline_body(server["snapshot"], query(source="both"))
    assert len(body) == 2


def test_timeline_cumulative_equals_engine(server):
    url = (server["url"]
           + f"/api/timeline?source=crime&granularity=year&{FULL}&cumulative=true")
    _, _, body = get_json(url)
    assert body == timeline_body(server["snapshot"], query(), cumulative_mode=True)
    counts = [p["count"] for p in body[0]["points"]]
    assert counts == sorted(counts)


def test_colocate_equals_engine(server):
    url = server["url"] + f"/api/colocate?granularity=year&{FULL}"
    _, _, body = get_json(url)
    assert body == colocate_body(server["snapshot"], query(source="both"))
    assert body["n"] == 3


def test_neighborhoods_geojson(server):
    _, _, body = get_json(server["url"] + "/api/neighborhoods")
    assert body["type"] == "FeatureCollection"
    ids = [f["properties"]["id"] for f in body["features"]]
    assert ids == ["alpha-heights", "bayview", "casterly"]
    assert all("display_name" in f["properties"] for f in body["features"])


def test_unknown_api_path_is_404(server):
    status, _, body = get_json(server["url"] + "/api/frobnicate")
    assert status == 404
    assert body["code"] == "not-found"


def test_root_serves_placeholder_without_assets(server):
    status, headers, body = get(server["url"] + "/")
    assert status == 200
    assert b"vcfat" in body
    assert headers["Content-Type"].startswith("text/html")


def test_static_assets_served_and_traversal_blocked(snapshot, tmp_path):
    assets = tmp_path / "assets"
    assets.mkdir()
    (assets / "index.html").write_text("<html>dash</html>")
    (assets / "app.js").write_text("console.log(1)")
    sibling = tmp_path / "assets-secrets"
    sibling.mkdir()
    (sibling / "key.txt").write_text("hunter2")
    state = ServiceState(snapshot, static_dir=assets)
    httpd = make_server(state, "127.0.0.1", 0)
    thread = threading.Thread(
        target=lambda: httpd.serve_forever(poll_interval=0.05), daemon=True)
    thread.start()
    try:
        base = f"http://127.0.0.1:{httpd.server_address[1]}"
        status, _, body = get(base + "/")
        assert status == 200 and b"dash" in body
        status, headers, _ = get(base + "/app.js")
        assert status == 200
        assert "javascript" in headers["Content-Type"]
        status, _, _ = get(base + "/../secret")
        assert status == 404
        # Sibling directories sharing the asset-dir name prefix stay hidden.
        status, _, body = get(base + "/../assets-secrets/key.txt")
        assert status == 404 and b"hunter2" not in body
    finally:
        httpd.shutdown()
        httpd.server_close()


def test_parallel_identical_requests_are_byte_identical(server):
    url = server["url"] + f"/api/aggregate?source=crime&granularity=year&{FULL}"
    with ThreadPoolExecutor(max_workers=8) as pool:
        bodies = list(pool.map(lambda _: get(url)[2], range(16)))
    assert len(set(bodies)) == 1


def test_reload_requires_token(server):
    req = urllib.request.Request(server["url"] + "/admin/reload", method="POST")
    try:
        with urllib.request.urlopen(req) as resp:
            status = resp.status
    except urllib.error.HTTPError as err:
        status = err.code
    assert status == 403


def test_reload_swaps_snapshot_and_rotates_build_id(server, input_files):
    old_build = server["snapshot"].build_id

    # Shrink the dataset on disk, then reload through the admin endpoint.
    result = run_ingest(input_files["crimes"], input_files["posts"],
                        input_files["districts"], IngestConfig())
    smaller = build_snapshot(result.crimes[:5], result.posts,
                             result.neighborhoods, result.registry)
    save_snapshot(smaller, server["path"])

    req = urllib.request.Request(server["url"] + "/admin/reload", method="POST",
                                 headers={"X-Admin-Token": "sekrit"})
    with urllib.request.urlopen(req) as resp:
        body = json.loads(resp.read())
    assert body["build_id"] == smaller.build_id != old_build

    _, headers, meta = get_json(server["url"] + "/api/meta")
    assert headers["X-Build-Id"] == smaller.build_id
    assert meta["sources"]["crime"] == 5
