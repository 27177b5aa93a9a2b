// Shared test fixtures: a three-district toy city and canned API bodies.

import type { FeatureCollection, Meta, SeriesBody } from "../src/types";

export const META: Meta = {
  build_id: "abc123def456",
  sources: { crime: 9, post: 6 },
  totals: {
    crime: { records: 9, counted: 9, unlocated: 0, uncategorized: 0 },
    post: { records: 6, counted: 5, unlocated: 1, uncategorized: 2 },
  },
  period: { from: "2018-03-05T02:00:00+00:00", to: "2022-12-11T21:00:00+00:00" },
  granularities: ["day", "week", "month", "year"],
  categories: [
    { id: "assault", display_name: "Assault" },
    { id: "robbery", display_name: "Robbery" },
    { id: "theft", display_name: "Theft" },
    { id: "uncategorized", display_name: "Uncategorized" },
  ],
  neighborhoods: 3,
};

function square(name: string, lon0: number) {
  return {
    type: "Feature" as const,
    properties: { id: name.toLowerCase().replace(/ /g, "-"), display_name: name },
    geometry: {
      type: "Polygon" as const,
      coordinates: [[[lon0, 0], [lon0 + 1, 0], [lon0 + 1, 1], [lon0, 1], [lon0, 0]]],
    },
  };
}

export const GEO: FeatureCollection = {
  type: "FeatureCollection",
  features: [square("Alpha Heights", 0), square("Bayview", 1), square("Casterly", 2)],
};

export const CRIME_COUNTS = { "alpha-heights": 4, "bayview": 3, "casterly": 2 };
export const POST_COUNTS = { "alpha-heights": 2, "bayview": 2, "casterly": 1 };

export const YEAR_SERIES: SeriesBody[] = [{
  source: "crime",
  granularity: "year",
  points: [
    { bucket: "2018", count: 2 },
    { bucket: "2019", count: 2 },
    { bucket: "2020", count: 2 },
    { bucket: "2021", count: 1 },
    { bucket: "2022", count: 2 },
  ],
}];

/**
 * Canned fetcher with a call log. Unknown aggregate/timeline/colocate
 * URLs fall back to shape-appropriate defaults so plans always resolve.
 */
export function cannedFetcher(overrides: Record<string, unknown> = {}) {
  const calls: string[] = [];
  const fetcher = async (url: string): Promise<unknown> => {
    calls.push(url);
    if (url in overrides) return structuredClone(overrides[url]);
    if (url.startsWith("/api/aggregate?")) {
      return url.includes("source=crime")
        ? structuredClone(CRIME_COUNTS)
        : structuredClone(POST_COUNTS);
    }
    if (url.startsWith("/api/timeline?")) return structuredClone(YEAR_SERIES);
    if (url.startsWith("/api/colocate?")) {
      return {
        rows: [
          { neighborhood: "alpha-heights", crime_count: 4, post_count: 2 },
          { neighborhood: "bayview", crime_count: 3, post_count: 2 },
          { neighborhood: "casterly", crime_count: 2, post_count: 1 },
        ],
        n: 3,
        rho: 0.866,
      };
    }
    throw new Error(`unexpected fetch: ${url}`);
  };
  return { fetcher, calls };
}

/** Small deterministic RNG so randomized tests replay exactly. */
export function lcg(seed: number): () => number {
  let x = seed >>> 0;
  return () => {
    x = (x * 1664525 + 1013904223) >>> 0;
    return x / 0x100000000;
  };
}
