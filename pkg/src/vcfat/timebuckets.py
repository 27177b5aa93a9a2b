"""Calendar bucketing of UTC instants into day/week/month/year keys.

All calendar math is UTC Gregorian with ISO-8601 week rules. Keys are
canonical strings whose lexicographic order matches chronological order
within one granularity:

    day    "YYYY-MM-DD"
    week   "GGGG-Www"   (ISO week-numbering year)
    month  "YYYY-MM"
    year   "YYYY"

These key formats are a wire contract shared by the HTTP API and export
files; do not change them.
"""
from __future__ import annotations

from datetime import date, datetime, timedelta, timezone

GRANULARITIES = ("day", "week", "month", "year")


class EmptyRangeError(ValueError):
    """Raised when a half-open time range [from, to) is empty."""


def ensure_utc(t: datetime) -> datetime:
    """Normalize a datetime to UTC; naive datetimes are taken as UTC."""
    if t.tzinfo is None:
        return t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc)


def parse_instant(text: str) -> datetime:
    """Parse an RFC 3339 / ISO-8601 instant or date into a UTC datetime.

    Accepts a trailing "Z", an explicit offset, or a bare date (midnight
    UTC). Raises ValueError on anything else.
    """
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    return ensure_utc(datetime.fromisoformat(s))


def bucket_of(t: datetime, granularity: str) -> str:
    """Canonical key of the bucket containing instant ``t``."""
    t = ensure_utc(t)
    if granularity == "day":
        return f"{t.year:04d}-{t.month:02d}-{t.day:02d}"
    if granularity == "week":
        iso = t.isocalendar()
        return f"{iso[0]:04d}-W{iso[1]:02d}"
    if granularity == "month":
        return f"{t.year:04d}-{t.month:02d}"
    if granularity == "year":
        return f"{t.year:04d}"
    raise ValueError(f"unknown granularity: {granularity!r}")


def bucket_start(key: str, granularity: str) -> datetime:
    """UTC instant at which the bucket named ``key`` begins."""
    if granularity == "day":
        d = date.fromisoformat(key)
    elif granularity == "week":
        year, week = key.split("-W")
        d = date.fromisocalendar(int(year), int(week), 1)
    elif granularity == "month":
        year, month = key.split("-")
        d = date(int(year), int(month), 1)
    elif granularity == "year":
        d = date(int(key), 1, 1)
    else:
        raise ValueError(f"unknown granularity: {granularity!r}")
    return datetime(d.year, d.month, d.day, tzinfo=timezone.utc)


def _next_start(start: datetime, granularity: str) -> datetime:
    if granularity == "day":
        return start + timedelta(days=1)
    if granularity == "week":
        return start + timedelta(days=7)
    if granularity == "month":
        if start.month == 12:
            return start.replace(year=start.year + 1, month=1)
        return start.replace(month=start.month + 1)
    return start.replace(year=start.year + 1)


def buckets_in_range(from_: datetime, to: datetime, granularity: str) -> list[str]:
    """Ascending, contiguous bucket keys covering the half-open [from, to).

    The first bucket contains ``from_``; the last contains the instant just
    before ``to``. Raises EmptyRangeError when from_ >= to.
    """
    from_ = ensure_utc(from_)
    to = ensure_utc(to)
    if from_ >= to:
        raise EmptyRangeError(f"empty range: {from_.isoformat()} >= {to.isoformat()}")
    keys = []
    start = bucket_start(bucket_of(from_, granularity), granularity)
    while start < to:
        keys.append(bucket_of(start, granularity))
        start = _next_start(start, granularity)
    return keys
