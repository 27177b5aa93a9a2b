// Pure ViewState reducer. Every view renders from this one state; user
// events are plain data so transitions replay deterministically.

import type { Granularity, Meta, Mode, ViewEvent, ViewState } from "./types";

const MODES: Mode[] = ["side-by-side", "overlay", "timeline", "cumulative"];
const GRANULARITIES: Granularity[] = ["day", "week", "month", "year"];

export function initialState(meta: Meta): ViewState {
  const from = meta.period ? meta.period.from.slice(0, 10) : "2018-01-01";
  const toDay = meta.period ? meta.period.to.slice(0, 10) : "2022-12-31";
  return {
    mode: "side-by-side",
    source: "both",
    granularity: "year",
    category: null,
    range: { from, to: nextDay(toDay) }, // half-open [from, to)
    hovered: null,
  };
}

export function nextDay(isoDay: string): string {
  const d = new Date(isoDay + "T00:00:00Z");
  d.setUTCDate(d.getUTCDate() + 1);
  return d.toISOString().slice(0, 10);
}

/** Category/granularity values the reducer accepts, from /api/meta. */
export interface Vocabulary {
  categories: Set<string>;
  neighborhoods: Set<string>;
}

export function vocabularyFrom(meta: Meta, districts: Iterable<string>): Vocabulary {
  return {
    categories: new Set(meta.categories.map((c) => c.id)),
    neighborhoods: new Set(districts),
  };
}

/**
 * Pure transition: returns the same state object for invalid events so
 * callers can detect no-ops by identity. Unrelated facets are preserved.
 */
export function reduce(state: ViewState, event: ViewEvent, vocab: Vocabulary): ViewState {
  switch (event.type) {
    case "set-mode":
      if (!MODES.includes(event.mode) || event.mode === state.mode) return state;
      return { ...state, mode: event.mode };
    case "set-category": {
      const category = event.category;
      if (category !== null && !vocab.categories.has(category)) return state;
      if (category === state.category) return state;
      return { ...state, category };
    }
    case "set-granularity":
      if (!GRANULARITIES.includes(event.granularity)) return state;
      if (event.granularity === state.granularity) return state;
      return { ...state, granularity: event.granularity };
    case "set-range": {
      if (!isIsoDay(event.from) || !isIsoDay(event.to)) return state;
      if (event.from >= event.to) return state;
      if (event.from === state.range.from && event.to === state.range.to) return state;
      return { ...state, range: { from: event.from, to: event.to } };
    }
    case "set-source":
      if (!["crime", "post", "both"].includes(event.source)) return state;
      if (event.source === state.source) return state;
      return { ...state, source: event.source };
    case "hover":
      if (!vocab.neighborhoods.has(event.neighborhood)) return state;
      if (state.hovered === event.neighborhood) return state;
      return { ...state, hovered: event.neighborhood };
    case "unhover":
      if (state.hovered === null) return state;
      return { ...state, hovered: null };
    default:
      return state;
  }
}

function isIsoDay(text: string): boolean {
  return /^\d{4}-\d{2}-\d{2}$/.test(text) && !Number.isNaN(Date.parse(text + "T00:00:00Z"));
}
