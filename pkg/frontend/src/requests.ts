// Pure mapping from ViewState to the API requests the visible view
// needs. The controller diffs consecutive plans by URL, so a transition
// triggers at most the calls its changed facet requires.

import type { SeriesBody, ViewState } from "./types";

export interface RequestPlan {
  /** Stable slot the response feeds, e.g. "choropleth:crime". */
  key: string;
  url: string;
}

function queryString(params: Record<string, string | null>): string {
  const parts: string[] = [];
  for (const [k, v] of Object.entries(params)) {
    if (v !== null && v !== "") parts.push(`${k}=${encodeURIComponent(v)}`);
  }
  return parts.join("&");
}

export function aggregateUrl(state: ViewState, source: "crime" | "post"): string {
  // Granularity deliberately omitted: it does not change aggregate results,
  // so granularity-only transitions must not refetch choropleths.
  return "/api/aggregate?" + queryString({
    source,
    from: state.range.from,
    to: state.range.to,
    category: state.category,
  });
}

export function timelineUrl(state: ViewState, cumulative: boolean): string {
  return "/api/timeline?" + queryString({
    source: state.source,
    granularity: state.granularity,
    from: state.range.from,
    to: state.range.to,
    category: state.category,
    cumulative: cumulative ? "true" : null,
  });
}

export function colocateUrl(state: ViewState): string {
  // Granularity omitted for the same reason as in aggregateUrl.
  return "/api/colocate?" + queryString({
    from: state.range.from,
    to: state.range.to,
    category: state.category,
  });
}

/**
 * Everything the current mode needs. Per-district small multiples in
 * timeline mode are assembled from one aggregate call per bucket, added
 * in a second phase once the timeline response reveals the bucket keys
 * (see planBucketRequests).
 */
export function planRequests(state: ViewState): RequestPlan[] {
  switch (state.mode) {
    case "side-by-side":
      return [
        { key: "choropleth:crime", url: aggregateUrl(state, "crime") },
        { key: "choropleth:post", url: aggregateUrl(state, "post") },
      ];
    case "overlay":
      return [
        { key: "choropleth:crime", url: aggregateUrl(state, "crime") },
        { key: "choropleth:post", url: aggregateUrl(state, "post") },
        { key: "colocate", url: colocateUrl(state) },
      ];
    case "timeline":
      return [{ key: "timeline", url: timelineUrl(state, false) }];
    case "cumulative":
      return [{ key: "timeline:cumulative", url: timelineUrl(state, true) }];
  }
}

/** Follow-up plan for timeline mode's per-district small multiples. */
export function planBucketRequests(
  state: ViewState,
  series: SeriesBody[],
  bucketRange: (key: string, granularity: ViewState["granularity"]) => { from: string; to: string },
): RequestPlan[] {
  if (state.mode !== "timeline" || series.length === 0) return [];
  const plans: RequestPlan[] = [];
  for (const point of series[0].points) {
    const range = bucketRange(point.bucket, state.granularity);
    const bucketState: ViewState = { ...state, range };
    for (const source of ["crime", "post"] as const) {
      plans.push({
        key: `bucket:${source}:${point.bucket}`,
        url: aggregateUrl(bucketState, source),
      });
    }
  }
  return plans;
}
