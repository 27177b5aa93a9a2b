"""Operator entry point: ingest, build, stats, export, serve.

Exit codes: 0 success, 1 data error (bad inputs, unreadable snapshot),
2 usage error. Every subcommand honors --json for machine-readable
output; export's --json prints exactly the corresponding API body.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .analytics import (
    AggregateSnapshot,
    SnapshotFormatError,
    load_snapshot,
    save_snapshot,
)
from .config import IngestConfig
from .locate import GeocodeCache, HttpGeocoder, StubGeocoder
from .model import IngestError, QueryError
from .pipeline import build_from_store, run_ingest, write_store
from .service import (
    ServiceState,
    aggregate_body,
    colocate_body,
    meta_body,
    query_from_params,
    serve,
    timeline_body,
)
from .timebuckets import GRANULARITIES


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcfat",
        description="Co-locate social-media posts with factual crime records.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse inputs into a record store")
    p_ingest.add_argument("--crimes", required=True, help="crime CSV path")
    p_ingest.add_argument("--posts", required=True, help="posts NDJSON path")
    p_ingest.add_argument("--districts", required=True, help="districts GeoJSON path")
    p_ingest.add_argument("--config", help="ingest config JSON (defaults built in)")
    p_ingest.add_argument("--out", default="store", help="record store directory")
    p_ingest.add_argument("--stub-geocoder", action="store_true",
                          help="use the offline stub geocoding provider")
    p_ingest.add_argument("--geocoder-url",
                          default=os.environ.get("VCFAT_GEOCODER_URL"),
                          help="HTTP geocoder endpoint (env VCFAT_GEOCODER_URL)")
    p_ingest.add_argument("--geocode-cache", help="geocode cache file path")
    p_ingest.add_argument("--json", action="store_true")

    p_build = sub.add_parser("build", help="build a snapshot from a record store")
    p_build.add_argument("--store", required=True)
    p_build.add_argument("--out", default="snapshot.json")
    p_build.add_argument("--json", action="store_true")

    p_stats = sub.add_parser("stats", help="print snapshot totals")
    p_stats.add_argument("--snapshot", required=True)
    p_stats.add_argument("--json", action="store_true")

    p_export = sub.add_parser("export", help="write a query result to a file")
    p_export.add_argument("--snapshot", required=True)
    p_export.add_argument("--kind", required=True,
                          choices=["aggregate", "timeline", "colocate"])
    p_export.add_argument("--source", help="crime | post | both")
    p_export.add_argument("--granularity", default="day", choices=GRANULARITIES)
    p_export.add_argument("--from", dest="from_", required=True,
                          help="ISO date, UTC midnight, inclusive")
    p_export.add_argument("--to", required=True,
                          help="ISO date, UTC midnight, exclusive")
    p_export.add_argument("--category")
    p_export.add_argument("--cumulative", action="store_true")
    p_export.add_argument("--format", dest="fmt", default="csv",
                          choices=["csv", "geojson", "json"])
    p_export.add_argument("--out", default="-", help="output path, - for stdout")
    p_export.add_argument("--json", action="store_true",
                          help="shortcut for --format json")

    p_serve = sub.add_parser("serve", help="serve the HTTP API and dashboard")
    p_serve.add_argument("--snapshot", help="snapshot file to serve")
    p_serve.add_argument("--store", help="record store to build from instead")
    p_serve.add_argument("--host", default=os.environ.get("VCFAT_HOST", "127.0.0.1"))
    p_serve.add_argument("--port", type=int,
                         default=int(os.environ.get("VCFAT_PORT", "8787")))
    p_serve.add_argument("--assets", help="static dashboard asset directory")
    p_serve.add_argument("--json", action="store_true")
    return parser


def _make_geocoder(args):
    if args.stub_geocoder or os.environ.get("VCFAT_GEOCODER_STUB") == "1":
        return StubGeocoder()
    if args.geocoder_url:
        return HttpGeocoder(args.geocoder_url,
                            key=os.environ.get("VCFAT_GEOCODER_KEY"))
    return None


def _cmd_ingest(args) -> int:
    config = IngestConfig.load(args.config) if args.config else IngestConfig()
    cache = None
    if args.geocode_cache:
        cache = GeocodeCache.load(args.geocode_cache)
    result = run_ingest(args.crimes, args.posts, args.districts, config,
                        geocoder=_make_geocoder(args), cache=cache)
    if args.geocode_cache and cache is not None:
        cache.save(args.geocode_cache)
    write_store(result, args.out)
    report = result.report_json()
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        cr, pr = report["crimes"], report["posts"]
        print(f"crimes: {cr['rows_accepted']}/{cr['rows_read']} accepted, "
              f"{cr['rows_rejected']} rejected {cr['rejection_reasons']}, "
              f"{cr['traffic_removed']} minor-traffic removed")
        print(f"posts:  {pr['rows_accepted']}/{pr['rows_read']} accepted, "
              f"{pr['rows_rejected']} rejected {pr['rejection_reasons']}")
        print(f"store written to {args.out}")
    return 0


def _cmd_build(args) -> int:
    snapshot = build_from_store(args.store)
    save_snapshot(snapshot, args.out)
    if args.json:
        print(json.dumps({"build_id": snapshot.build_id, "out": args.out}))
    else:
        print(f"snapshot {snapshot.build_id[:12]} written to {args.out}")
    return 0


def _category_counts(snapshot: AggregateSnapshot) -> dict[str, dict[str, int]]:
    out: dict[str, dict[str, int]] = {"crime": {}, "post": {}}
    for (source, _district, category, _day), n in snapshot.cells.items():
        out[source][category] = out[source].get(category, 0) + n
    return {s: dict(sorted(cats.items())) for s, cats in out.items()}


def _cmd_stats(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    body = meta_body(snapshot)
    body["category_counts"] = _category_counts(snapshot)
    if args.json:
        print(json.dumps(body, indent=2))
        return 0
    print(f"build_id: {snapshot.build_id}")
    if body["period"]:
        print(f"period:   {body['period']['from']} .. {body['period']['to']}")
    for source in ("crime", "post"):
        totals = snapshot.totals.get(source, {})
        print(f"{source}: {totals.get('records', 0)} records, "
              f"{totals.get('counted', 0)} counted, "
              f"{totals.get('unlocated', 0)} unlocated")
        for category, n in body["category_counts"][source].items():
            print(f"  {category}: {n}")
    return 0


def _export_csv(kind: str, body) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if kind == "aggregate":
        writer.writerow(["neighborhood", "count"])
        for district in sorted(body):
            writer.writerow([district, body[district]])
    elif kind == "timeline":
        writer.writerow(["source", "bucket", "count"])
        for series in body:
            for point in series["points"]:
                writer.writerow([series["source"], point["bucket"], point["count"]])
    else:  # colocate; rho and n ride along as comment lines
        buf.write(f"# rho={body['rho']}\n")
        if body.get("rho_reason"):
            buf.write(f"# rho_reason={body['rho_reason']}\n")
        buf.write(f"# n={body['n']}\n")
        writer.writerow(["neighborhood", "crime_count", "post_count"])
        for row in body["rows"]:
            writer.writerow([row["neighborhood"], row["crime_count"],
                             row["post_count"]])
    return buf.getvalue()


def _export_geojson(snapshot: AggregateSnapshot, body: dict) -> str:
    geojson = snapshot.neighborhoods_geojson or {"type": "FeatureCollection",
                                                 "features": []}
    features = []
    for feature in geojson["features"]:
        feature = json.loads(json.dumps(feature))  # deep copy
        district = feature["properties"]["id"]
        feature["properties"]["count"] = body.get(district, 0)
        features.append(feature)
    return json.dumps({"type": "FeatureCollection", "features": features})


def _cmd_export(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    params = {"from": args.from_, "to": args.to, "granularity": args.granularity}
    if args.source:
        params["source"] = args.source
    if args.category:
        params["category"] = args.category

    if args.kind == "aggregate":
        q = query_from_params(params)
        body = aggregate_body(snapshot, q)
    elif args.kind == "timeline":
        q = query_from_params(params)
        body = timeline_body(snapshot, q, cumulative_mode=args.cumulative)
    else:
        q = query_from_params(params, default_source="both")
        body = colocate_body(snapshot, q)

    fmt = "json" if args.json else args.fmt
    if fmt == "json":
        text = json.dumps(body)
    elif fmt == "geojson":
        if args.kind != "aggregate":
            raise QueryError("geojson export is only defined for aggregate")
        text = _export_geojson(snapshot, body)
    else:
        text = _export_csv(args.kind, body)

    if args.out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n",
                                  encoding="utf-8")
    return 0


def _cmd_serve(args) -> int:
    if args.snapshot:
        path = args.snapshot
        reloader = lambda: load_snapshot(path)
    elif args.store:
        store = args.store
        reloader = lambda: build_from_store(store)
    else:
        raise IngestError("serve needs --snapshot or --store")
    snapshot = reloader()
    state = ServiceState(snapshot, reloader=reloader, static_dir=args.assets,
                         admin_token=os.environ.get("VCFAT_ADMIN_TOKEN"))
    serve(state, args.host, args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "ingest": _cmd_ingest,
        "build": _cmd_build,
        "stats": _cmd_stats,
        "export": _cmd_export,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (IngestError, SnapshotFormatError, QueryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
