// DOM glue: bootstrap, control wiring, and frame rendering. Everything
// data-shaped lives in the pure modules; this file only touches the DOM.

import { Controller, tooltipText, type Frame } from "./controller";
import { makeColorScale } from "./color";
import { initialState, vocabularyFrom } from "./state";
import {
  renderBubbleOverlay,
  renderChoropleth,
  renderDensityChart,
  renderLegend,
  renderSmallMultiple,
} from "./render";
import type {
  AggregateBody,
  ColocateBody,
  FeatureCollection,
  Meta,
  Mode,
  SeriesBody,
  ViewEvent,
} from "./types";

async function fetchJson(url: string): Promise<unknown> {
  const resp = await fetch(url);
  if (!resp.ok) {
    const detail = await resp.text();
    throw new Error(`${url} -> ${resp.status}: ${detail}`);
  }
  return resp.json();
}

const MODE_LABELS: Record<Mode, string> = {
  "side-by-side": "Side-by-side maps",
  "overlay": "Overlay map",
  "timeline": "Timelines",
  "cumulative": "Cumulative",
};

export async function boot(root: HTMLElement): Promise<void> {
  const meta = (await fetchJson("/api/meta")) as Meta;
  const geo = (await fetchJson("/api/neighborhoods")) as FeatureCollection;
  const districts = geo.features.map((f) => f.properties.id);
  const vocab = vocabularyFrom(meta, districts);
  const controller = new Controller(meta, vocab, initialState(meta), fetchJson);

  root.innerHTML = `
    <header>
      <h1>City crime &amp; public posts</h1>
      <p class="subtitle">
        ${meta.sources.crime.toLocaleString()} crime records and
        ${meta.sources.post.toLocaleString()} posts, build
        <code>${meta.build_id.slice(0, 12)}</code>
      </p>
    </header>
    <nav id="controls"></nav>
    <main id="view"></main>
    <div id="tooltip" hidden></div>`;
  const controls = root.querySelector("#controls") as HTMLElement;
  const view = root.querySelector("#view") as HTMLElement;
  const tooltip = root.querySelector("#tooltip") as HTMLElement;

  const dispatch = (event: ViewEvent) => void controller.dispatch(event);

  function renderControls(): void {
    const state = controller.current();
    const modeButtons = (Object.keys(MODE_LABELS) as Mode[]).map((mode) =>
      `<button data-mode="${mode}" class="${state.mode === mode ? "active" : ""}">` +
      `${MODE_LABELS[mode]}</button>`).join("");
    const categories = [`<option value="">All categories</option>`]
      .concat(meta.categories.map((c) =>
        `<option value="${c.id}" ${state.category === c.id ? "selected" : ""}>` +
        `${c.display_name}</option>`))
      .join("");
    const granularities = meta.granularities.map((g) =>
      `<option value="${g}" ${state.granularity === g ? "selected" : ""}>${g}</option>`,
    ).join("");
    const sources = ["both", "crime", "post"].map((s) =>
      `<option value="${s}" ${state.source === s ? "selected" : ""}>${s}</option>`,
    ).join("");
    controls.innerHTML = `
      <div class="mode-row">${modeButtons}</div>
      <label>Category <select id="category">${categories}</select></label>
      <label>Granularity <select id="granularity">${granularities}</select></label>
      <label>Source <select id="source">${sources}</select></label>
      <label>From <input id="from" type="date" value="${state.range.from}"></label>
      <label>To <input id="to" type="date" value="${state.range.to}"></label>`;

    controls.querySelectorAll("button[data-mode]").forEach((button) =>
      button.addEventListener("click", () =>
        dispatch({ type: "set-mode", mode: button.getAttribute("data-mode") as Mode })));
    (controls.querySelector("#category") as HTMLSelectElement).onchange = (e) =>
      dispatch({ type: "set-category",
                 category: (e.target as HTMLSelectElement).value || null });
    (controls.querySelector("#granularity") as HTMLSelectElement).onchange = (e) =>
      dispatch({ type: "set-granularity",
                 granularity: (e.target as HTMLSelectElement).value as never });
    (controls.querySelector("#source") as HTMLSelectElement).onchange = (e) =>
      dispatch({ type: "set-source",
                 source: (e.target as HTMLSelectElement).value as never });
    const fromInput = controls.querySelector("#from") as HTMLInputElement;
    const toInput = controls.querySelector("#to") as HTMLInputElement;
    const rangeChanged = () =>
      dispatch({ type: "set-range", from: fromInput.value, to: toInput.value });
    fromInput.onchange = rangeChanged;
    toInput.onchange = rangeChanged;
  }

  function renderFrame(frame: Frame): void {
    renderControls();
    const state = frame.state;
    if (state.mode === "side-by-side") {
      const crime = (frame.slots.get("choropleth:crime") ?? {}) as AggregateBody;
      const post = (frame.slots.get("choropleth:post") ?? {}) as AggregateBody;
      const crimeScale = makeColorScale(Math.max(0, ...Object.values(crime)));
      const postScale = makeColorScale(Math.max(0, ...Object.values(post)));
      view.innerHTML = `
        <div class="maps">
          <section class="map" data-noun="crimes">
            <h2>Crime records</h2>
            ${renderChoropleth(geo, crime, crimeScale, { hovered: state.hovered })}
            ${renderLegend(crimeScale, "crimes")}
          </section>
          <section class="map" data-noun="posts">
            <h2>Posts</h2>
            ${renderChoropleth(geo, post, postScale, { hovered: state.hovered })}
            ${renderLegend(postScale, "posts")}
          </section>
        </div>`;
    } else if (state.mode === "overlay") {
      const crime = (frame.slots.get("choropleth:crime") ?? {}) as AggregateBody;
      const post = (frame.slots.get("choropleth:post") ?? {}) as AggregateBody;
      const colocate = frame.slots.get("colocate") as ColocateBody | undefined;
      const scale = makeColorScale(Math.max(0, ...Object.values(crime)));
      const rho = colocate && colocate.rho !== null
        ? `Spearman rho = ${colocate.rho.toFixed(3)} over ${colocate.n} districts`
        : `rho unavailable (${colocate?.rho_reason ?? "no data"})`;
      view.innerHTML = `
        <div class="maps">
          <section class="map" data-noun="crimes">
            <h2>Crime heatmap with post bubbles</h2>
            ${renderBubbleOverlay(geo, crime, post, scale, { hovered: state.hovered })}
            ${renderLegend(scale, "crimes")}
            <p class="rho">${rho}</p>
          </section>
        </div>`;
    } else if (state.mode === "timeline") {
      const series = (frame.slots.get("timeline") ?? []) as SeriesBody[];
      const charts = series.map((s) =>
        `<section><h2>${s.source} per ${s.granularity} (city-wide)</h2>` +
        `${renderDensityChart(s, 860, 120, s.source === "crime" ? "#6a51a3" : "#1b7837")}` +
        `</section>`).join("");
      const buckets = series.length ? series[0].points.map((p) => p.bucket) : [];
      const multiples = geo.features
        .slice()
        .sort((a, b) => a.properties.id.localeCompare(b.properties.id))
        .map((feature) => {
          const id = feature.properties.id;
          const crime = buckets.map((b) =>
            ((frame.slots.get(`bucket:crime:${b}`) ?? {}) as AggregateBody)[id] ?? 0);
          const post = buckets.map((b) =>
            ((frame.slots.get(`bucket:post:${b}`) ?? {}) as AggregateBody)[id] ?? 0);
          return renderSmallMultiple(feature.properties.display_name, buckets, crime, post);
        }).join("");
      view.innerHTML = charts +
        `<h2>Per district</h2><div class="multiples">${multiples}</div>`;
    } else {
      const series = (frame.slots.get("timeline:cumulative") ?? []) as SeriesBody[];
      view.innerHTML = series.map((s) =>
        `<section><h2>Cumulative ${s.source} per ${s.granularity}</h2>` +
        `${renderDensityChart(s, 860, 160, s.source === "crime" ? "#6a51a3" : "#1b7837")}` +
        `</section>`).join("");
    }
    wireHover();
  }

  let mouse = { x: 0, y: 0 };
  document.addEventListener("mousemove", (e) => {
    mouse = { x: e.clientX, y: e.clientY };
    if (!tooltip.hidden) positionTooltip();
  });

  function positionTooltip(): void {
    tooltip.style.left = `${mouse.x + 14}px`;
    tooltip.style.top = `${mouse.y + 14}px`;
  }

  function wireHover(): void {
    view.querySelectorAll("path.district").forEach((path) => {
      path.addEventListener("mouseenter", () => {
        const id = path.getAttribute("data-id")!;
        const name = path.getAttribute("data-name")!;
        const count = Number(path.getAttribute("data-count"));
        const noun = (path.closest("[data-noun]")?.getAttribute("data-noun")
          ?? "crimes") as "crimes" | "posts";
        tooltip.textContent = tooltipText(name, count, noun);
        tooltip.hidden = false;
        positionTooltip();
        dispatch({ type: "hover", neighborhood: id });
      });
      path.addEventListener("mouseleave", () => {
        tooltip.hidden = true;
        dispatch({ type: "unhover" });
      });
    });
  }

  controller.onFrame(renderFrame);
  await controller.refresh();
}
