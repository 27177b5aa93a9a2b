// Client-side bucket boundary math, needed to turn timeline bucket keys
// into half-open [from, to) day ranges for per-bucket aggregate queries.
// Mirrors the server's canonical key formats exactly.

import type { Granularity } from "./types";

function pad(n: number, width: number): string {
  return String(n).padStart(width, "0");
}

function isoDay(d: Date): string {
  return `${pad(d.getUTCFullYear(), 4)}-${pad(d.getUTCMonth() + 1, 2)}-${pad(d.getUTCDate(), 2)}`;
}

function addDays(d: Date, days: number): Date {
  const out = new Date(d.getTime());
  out.setUTCDate(out.getUTCDate() + days);
  return out;
}

/** Monday of ISO week `week` in ISO year `year` (Jan 4 is always W01). */
export function isoWeekMonday(year: number, week: number): Date {
  const jan4 = new Date(Date.UTC(year, 0, 4));
  const weekday = jan4.getUTCDay() === 0 ? 7 : jan4.getUTCDay(); // 1=Mon..7=Sun
  const mondayW1 = addDays(jan4, 1 - weekday);
  return addDays(mondayW1, (week - 1) * 7);
}

/** Half-open [from, to) ISO day range covered by one bucket key. */
export function bucketRange(key: string, granularity: Granularity): { from: string; to: string } {
  if (granularity === "day") {
    const start = new Date(key + "T00:00:00Z");
    return { from: key, to: isoDay(addDays(start, 1)) };
  }
  if (granularity === "week") {
    const [year, week] = key.split("-W").map(Number);
    const monday = isoWeekMonday(year, week);
    return { from: isoDay(monday), to: isoDay(addDays(monday, 7)) };
  }
  if (granularity === "month") {
    const [year, month] = key.split("-").map(Number);
    return {
      from: isoDay(new Date(Date.UTC(year, month - 1, 1))),
      to: isoDay(new Date(Date.UTC(year, month, 1))),
    };
  }
  const year = Number(key);
  return {
    from: isoDay(new Date(Date.UTC(year, 0, 1))),
    to: isoDay(new Date(Date.UTC(year + 1, 0, 1))),
  };
}
