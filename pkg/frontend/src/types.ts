// Wire types mirroring the HTTP API payloads.

export type Source = "crime" | "post";
export type Granularity = "day" | "week" | "month" | "year";
export type Mode = "side-by-side" | "overlay" | "timeline" | "cumulative";

export interface Meta {
  build_id: string;
  sources: Record<Source, number>;
  totals: Record<string, Record<string, number>>;
  period: { from: string; to: string } | null;
  granularities: Granularity[];
  categories: { id: string; display_name: string }[];
  neighborhoods: number;
}

export interface Feature {
  type: "Feature";
  properties: { id: string; display_name: string };
  geometry:
    | { type: "Polygon"; coordinates: number[][][] }
    | { type: "MultiPolygon"; coordinates: number[][][][] };
}

export interface FeatureCollection {
  type: "FeatureCollection";
  features: Feature[];
}

/** /api/aggregate body: district id -> count. */
export type AggregateBody = Record<string, number>;

export interface SeriesBody {
  source: Source;
  granularity: Granularity;
  points: { bucket: string; count: number }[];
}

export interface ColocateBody {
  rows: { neighborhood: string; crime_count: number; post_count: number }[];
  n: number;
  rho: number | null;
  rho_reason?: string;
}

export interface TimeRange {
  from: string; // ISO date, inclusive
  to: string;   // ISO date, exclusive
}

/** The one state object driving every visible view. */
export interface ViewState {
  mode: Mode;
  source: Source | "both";
  granularity: Granularity;
  category: string | null;
  range: TimeRange;
  hovered: string | null;
}

export type ViewEvent =
  | { type: "set-mode"; mode: Mode }
  | { type: "set-category"; category: string | null }
  | { type: "set-granularity"; granularity: Granularity }
  | { type: "set-range"; from: string; to: string }
  | { type: "set-source"; source: Source | "both" }
  | { type: "hover"; neighborhood: string }
  | { type: "unhover" };
