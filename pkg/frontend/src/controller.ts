// Event -> state -> fetch orchestration. One dispatched event produces
// one state transition; every view renders from the resulting frame, so
// a category change repaints both side-by-side maps from a single
// transition. Responses are cached by URL and stale in-flight responses
// (superseded by a newer transition) are discarded.

import { bucketRange } from "./buckets";
import { planBucketRequests, planRequests } from "./requests";
import { reduce, type Vocabulary } from "./state";
import type { Meta, SeriesBody, ViewEvent, ViewState } from "./types";

export type Fetcher = (url: string) => Promise<unknown>;

export interface Frame {
  state: ViewState;
  /** Plan key -> response body, for every slot the mode needs. */
  slots: Map<string, unknown>;
  meta: Meta;
}

export class Controller {
  private state: ViewState;
  private readonly vocab: Vocabulary;
  private readonly cache = new Map<string, unknown>();
  private version = 0;
  private readonly listeners: ((frame: Frame) => void)[] = [];
  /** URLs actually fetched, in order; tests assert refetch behavior. */
  readonly fetched: string[] = [];

  constructor(
    private readonly meta: Meta,
    vocab: Vocabulary,
    initial: ViewState,
    private readonly fetcher: Fetcher,
  ) {
    this.vocab = vocab;
    this.state = initial;
  }

  onFrame(listener: (frame: Frame) => void): void {
    this.listeners.push(listener);
  }

  current(): ViewState {
    return this.state;
  }

  private async fetchInto(url: string): Promise<unknown> {
    this.fetched.push(url);
    const body = await this.fetcher(url);
    this.cache.set(url, body);
    return body;
  }

  /** Apply one event; resolves once the frame for it is complete. */
  async dispatch(event: ViewEvent): Promise<ViewState> {
    const next = reduce(this.state, event, this.vocab);
    if (next === this.state) return this.state; // invalid or no-op event
    this.state = next;
    const version = ++this.version;

    const plan = planRequests(next);
    await Promise.all(
      plan.filter((p) => !this.cache.has(p.url)).map((p) => this.fetchInto(p.url)),
    );
    if (version !== this.version) return this.state; // superseded; drop

    // Timeline mode pulls per-bucket aggregates for the small multiples
    // once the bucket keys are known.
    if (next.mode === "timeline") {
      const series = this.cache.get(plan[0].url) as SeriesBody[];
      const followUps = planBucketRequests(next, series, bucketRange);
      await Promise.all(
        followUps.filter((p) => !this.cache.has(p.url)).map((p) => this.fetchInto(p.url)),
      );
      if (version !== this.version) return this.state;
      this.emit([...plan, ...followUps]);
    } else {
      this.emit(plan);
    }
    return this.state;
  }

  private emit(plan: { key: string; url: string }[]): void {
    const slots = new Map<string, unknown>();
    for (const p of plan) slots.set(p.key, this.cache.get(p.url));
    const frame: Frame = { state: this.state, slots, meta: this.meta };
    for (const listener of this.listeners) listener(frame);
  }

  /** Frame for the current state, fetching anything missing. */
  async refresh(): Promise<Frame> {
    const plan = planRequests(this.state);
    await Promise.all(
      plan.filter((p) => !this.cache.has(p.url)).map((p) => this.fetchInto(p.url)),
    );
    let fullPlan = plan;
    if (this.state.mode === "timeline") {
      const series = this.cache.get(plan[0].url) as SeriesBody[];
      const followUps = planBucketRequests(this.state, series, bucketRange);
      await Promise.all(
        followUps.filter((p) => !this.cache.has(p.url)).map((p) => this.fetchInto(p.url)),
      );
      fullPlan = [...plan, ...followUps];
    }
    const slots = new Map<string, unknown>();
    for (const p of fullPlan) slots.set(p.key, this.cache.get(p.url));
    const frame: Frame = { state: this.state, slots, meta: this.meta };
    for (const listener of this.listeners) listener(frame);
    return frame;
  }
}

/** Tooltip text: exactly the served district name and count. */
export function tooltipText(
  displayName: string,
  count: number,
  noun: "crimes" | "posts",
): string {
  return `${displayName}: ${count} ${noun}`;
}
