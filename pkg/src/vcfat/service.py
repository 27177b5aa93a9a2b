"""Read-mostly HTTP API over one immutable snapshot.

Handlers contain no analytics logic: each endpoint body is built by the
same functions the CLI export path uses, which serialize the engine
results directly. The snapshot lives behind a single reference; the
admin reload endpoint swaps it atomically, so concurrent readers see
the old snapshot or the new one, never a mix. Every response carries
the serving snapshot's build id in the X-Build-Id header.
"""
from __future__ import annotations

import json
import mimetypes
import os
import threading
from datetime import datetime
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .analytics import (
    AggregateSnapshot,
    colocate,
    cumulative,
    query_counts,
    timeline,
)
from .model import AnalyticsQuery, InvalidRangeError, QueryError, UnknownSourceError
from .timebuckets import GRANULARITIES, parse_instant

PLACEHOLDER_INDEX = """<!doctype html>
<html><head><title>vcfat</title></head>
<body><h1>vcfat analytics service</h1>
<p>No dashboard assets configured. API endpoints:</p>
<ul>
<li>GET /api/meta</li>
<li>GET /api/neighborhoods</li>
<li>GET /api/aggregate?source=crime|post&amp;granularity=&amp;from=&amp;to=&amp;category=</li>
<li>GET /api/timeline?source=crime|post|both&amp;granularity=&amp;from=&amp;to=&amp;category=&amp;cumulative=</li>
<li>GET /api/colocate?granularity=&amp;from=&amp;to=&amp;category=</li>
</ul></body></html>
"""


# ---------------------------------------------------------------------------
# Endpoint bodies, shared verbatim by the CLI export path.

def meta_body(snapshot: AggregateSnapshot) -> dict:
    period = None
    if snapshot.period is not None:
        period = {"from": snapshot.period[0].isoformat(),
                  "to": snapshot.period[1].isoformat()}
    return {
        "build_id": snapshot.build_id,
        "sources": {s: snapshot.totals.get(s, {}).get("records", 0)
                    for s in ("crime", "post")},
        "totals": snapshot.totals,
        "period": period,
        "granularities": list(GRANULARITIES),
        "categories": [{"id": cid, "display_name": name}
                       for cid, name in snapshot.categories],
        "neighborhoods": len(snapshot.districts),
    }


def aggregate_body(snapshot: AggregateSnapshot, q: AnalyticsQuery) -> dict:
    return query_counts(snapshot, q)


def timeline_body(snapshot: AggregateSnapshot, q: AnalyticsQuery,
                  cumulative_mode: bool = False) -> list[dict]:
    series = timeline(snapshot, q)
    if cumulative_mode:
        series = [cumulative(s) for s in series]
    return [s.to_json() for s in series]


def colocate_body(snapshot: AggregateSnapshot, q: AnalyticsQuery) -> dict:
    return colocate(snapshot, q).to_json()


def parse_query_instant(text: str) -> datetime:
    """ISO date (UTC midnight) or full instant, for from/to params."""
    try:
        return parse_instant(text)
    except ValueError as exc:
        raise InvalidRangeError(f"unparseable date: {text!r}") from exc


def query_from_params(params: dict[str, str],
                      default_source: str | None = None) -> AnalyticsQuery:
    source = params.get("source", default_source)
    if not source:
        raise UnknownSourceError("missing source parameter")
    for required in ("from", "to"):
        if required not in params:
            raise InvalidRangeError(f"missing {required} parameter")
    return AnalyticsQuery(
        source=source,
        from_=parse_query_instant(params["from"]),
        to=parse_query_instant(params["to"]),
        granularity=params.get("granularity", "day"),
        category=params.get("category") or None,
    )


# ---------------------------------------------------------------------------
# Service state and handler

class ServiceState:
    """Holds the current snapshot reference plus the reload recipe."""

    def __init__(self, snapshot: AggregateSnapshot, reloader=None,
                 static_dir: str | Path | None = None,
                 admin_token: str | None = None):
        self.snapshot = snapshot
        self.reloader = reloader  # () -> AggregateSnapshot
        self.static_dir = Path(static_dir) if static_dir else None
        self.admin_token = admin_token
        self._reload_lock = threading.Lock()

    def reload(self) -> AggregateSnapshot:
        if self.reloader is None:
            raise RuntimeError("no reload source configured")
        with self._reload_lock:
            snapshot = self.reloader()
            self.snapshot = snapshot  # atomic reference swap
            return snapshot


class ApiHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "vcfat"
    quiet = True

    def log_message(self, fmt, *args):
        if not self.quiet:
            super().log_message(fmt, *args)

    @property
    def state(self) -> ServiceState:
        return self.server.state  # type: ignore[attr-defined]

    # -- plumbing ----------------------------------------------------------

    def _send(self, status: int, body: bytes, content_type: str,
              build_id: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("X-Build-Id", build_id)
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, obj, build_id: str, status: int = 200) -> None:
        body = json.dumps(obj).encode("utf-8")
        self._send(status, body, "application/json", build_id)

    def _send_error(self, status: int, code: str, message: str,
                    build_id: str) -> None:
        self._send_json({"status": status, "code": code, "message": message},
                        build_id, status=status)

    def _params(self) -> dict[str, str]:
        parsed = parse_qs(urlparse(self.path).query)
        return {k: v[0] for k, v in parsed.items() if v}

    # -- GET ---------------------------------------------------------------

    def do_GET(self):
        snapshot = self.state.snapshot  # one read; stable for this request
        path = urlparse(self.path).path
        try:
            if path == "/api/meta":
                self._send_json(meta_body(snapshot), snapshot.build_id)
            elif path == "/api/neighborhoods":
                geojson = snapshot.neighborhoods_geojson or {
                    "type": "FeatureCollection", "features": []}
                self._send_json(geojson, snapshot.build_id)
            elif path == "/api/aggregate":
                q = query_from_params(self._params())
                self._send_json(aggregate_body(snapshot, q), snapshot.build_id)
            elif path == "/api/timeline":
                params = self._params()
                q = query_from_params(params)
                cumulative_mode = params.get("cumulative", "false") == "true"
                self._send_json(timeline_body(snapshot, q, cumulative_mode),
                                snapshot.build_id)
            elif path == "/api/colocate":
                q = query_from_params(self._params(), default_source="both")
                self._send_json(colocate_body(snapshot, q), snapshot.build_id)
            elif path.startswith("/api/"):
                self._send_error(404, "not-found", f"no such endpoint: {path}",
                                 snapshot.build_id)
            else:
                self._serve_static(path, snapshot.build_id)
        except QueryError as exc:
            self._send_error(400, exc.code, str(exc), snapshot.build_id)

    def _serve_static(self, path: str, build_id: str) -> None:
        if path == "/":
            path = "/index.html"
        root = self.state.static_dir
        if root is None or not root.is_dir():
            if path == "/index.html":
                self._send(200, PLACEHOLDER_INDEX.encode("utf-8"),
                           "text/html; charset=utf-8", build_id)
            else:
                self._send_error(404, "not-found", "no static assets", build_id)
            return
        candidate = (root / path.lstrip("/")).resolve()
        if not candidate.is_relative_to(root.resolve()) or not candidate.is_file():
            self._send_error(404, "not-found", f"no such asset: {path}", build_id)
            return
        ctype = mimetypes.guess_type(candidate.name)[0] or "application/octet-stream"
        self._send(200, candidate.read_bytes(), ctype, build_id)

    # -- POST --------------------------------------------------------------

    def do_POST(self):
        snapshot = self.state.snapshot
        path = urlparse(self.path).path
        if path != "/admin/reload":
            self._send_error(404, "not-found", f"no such endpoint: {path}",
                             snapshot.build_id)
            return
        token = self.state.admin_token
        presented = self.headers.get("X-Admin-Token")
        auth = self.headers.get("Authorization", "")
        if presented is None and auth.startswith("Bearer "):
            presented = auth[len("Bearer "):]
        if not token or presented != token:
            self._send_error(403, "forbidden", "admin token missing or wrong",
                             snapshot.build_id)
            return
        try:
            new_snapshot = self.state.reload()
        except Exception as exc:
            self._send_error(500, "reload-failed", str(exc), snapshot.build_id)
            return
        self._send_json({"build_id": new_snapshot.build_id},
                        new_snapshot.build_id)


def make_server(state: ServiceState, host: str = "127.0.0.1",
                port: int = 0, quiet: bool = True) -> ThreadingHTTPServer:
    handler = type("BoundApiHandler", (ApiHandler,), {"quiet": quiet})
    server = ThreadingHTTPServer((host, port), handler)
    server.state = state  # type: ignore[attr-defined]
    return server


def serve(state: ServiceState, host: str, port: int, quiet: bool = False) -> None:
    """Run until interrupted; startup fails loudly on an occupied port."""
    server = make_server(state, host, port, quiet=quiet)
    actual_host, actual_port = server.server_address[:2]
    print(f"serving on http://{actual_host}:{actual_port}/ "
          f"(build {state.snapshot.build_id[:12]})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def admin_token_from_env() -> str | None:
    return os.environ.get("VCFAT_ADMIN_TOKEN")
