// Pure SVG builders: every function maps data to a markup string, so
// views are testable without a browser and the DOM layer stays thin.

import { bubbleRadius } from "./bubbles";
import { CHOROPLETH_COLORS, type ColorScale } from "./color";
import { featureCentroid, featurePath, fitProjection, type Projection } from "./geometry";
import type { AggregateBody, FeatureCollection, SeriesBody } from "./types";

const esc = (s: string) => s.replace(/&/g, "&amp;").replace(/</g, "&lt;")
  .replace(/>/g, "&gt;").replace(/"/g, "&quot;");

export interface ChoroplethOptions {
  width?: number;
  height?: number;
  hovered?: string | null;
}

export function renderChoropleth(
  geo: FeatureCollection,
  counts: AggregateBody,
  scale: ColorScale,
  options: ChoroplethOptions = {},
): string {
  const width = options.width ?? 420;
  const height = options.height ?? 340;
  const proj = fitProjection(geo, width, height);
  return svg(width, height,
    renderChoroplethInto(geo, counts, scale, proj, options.hovered ?? null));
}

export function renderBubbleOverlay(
  geo: FeatureCollection,
  crimeCounts: AggregateBody,
  postCounts: AggregateBody,
  scale: ColorScale,
  options: ChoroplethOptions = {},
): string {
  const width = options.width ?? 420;
  const height = options.height ?? 340;
  const proj = fitProjection(geo, width, height);
  const base = renderChoroplethInto(geo, crimeCounts, scale, proj, options.hovered ?? null);
  const maxPost = Math.max(0, ...Object.values(postCounts));
  const bubbles = geo.features.map((feature) => {
    const id = feature.properties.id;
    const radius = bubbleRadius(postCounts[id] ?? 0, maxPost, 4, 26);
    if (radius === null) return "";
    const [lon, lat] = featureCentroid(feature);
    return `<circle class="bubble" cx="${proj.x(lon).toFixed(2)}" ` +
      `cy="${proj.y(lat).toFixed(2)}" r="${radius.toFixed(2)}" ` +
      `data-id="${esc(id)}" data-count="${postCounts[id] ?? 0}"/>`;
  });
  return svg(width, height, base + bubbles.join(""));
}

function renderChoroplethInto(
  geo: FeatureCollection,
  counts: AggregateBody,
  scale: ColorScale,
  proj: Projection,
  hovered: string | null,
): string {
  return geo.features.map((feature) => {
    const id = feature.properties.id;
    const count = counts[id] ?? 0;
    const hoverClass = hovered === id ? " hovered" : "";
    return `<path class="district${hoverClass}" d="${featurePath(feature, proj)}" ` +
      `fill="${scale.colorOf(count)}" data-id="${esc(id)}" ` +
      `data-name="${esc(feature.properties.display_name)}" ` +
      `data-count="${count}" data-bin="${scale.binOf(count)}"/>`;
  }).join("");
}

export function renderLegend(scale: ColorScale, title: string): string {
  const rows = scale.legend().map((label, bin) =>
    `<span class="legend-item"><span class="swatch" ` +
    `style="background:${CHOROPLETH_COLORS[bin]}" data-bin="${bin}"></span>` +
    `${esc(label)}</span>`);
  return `<div class="legend"><strong>${esc(title)}</strong>${rows.join("")}</div>`;
}

/** City-wide density chart: filled area under a line, one per series. */
export function renderDensityChart(
  series: SeriesBody,
  width = 860,
  height = 120,
  color = "#6a51a3",
): string {
  const points = series.points;
  if (points.length === 0) return svg(width, height, "");
  const max = Math.max(1, ...points.map((p) => p.count));
  const step = width / Math.max(1, points.length);
  const coords = points.map((p, i) => {
    const x = i * step + step / 2;
    const y = height - 14 - (p.count / max) * (height - 24);
    return `${x.toFixed(1)},${y.toFixed(1)}`;
  });
  const area = `M${(step / 2).toFixed(1)},${height - 14} L` + coords.join(" L") +
    ` L${(points.length * step - step / 2).toFixed(1)},${height - 14} Z`;
  const labelEvery = Math.ceil(points.length / 10);
  const labels = points.map((p, i) => i % labelEvery === 0
    ? `<text class="tick" x="${(i * step + step / 2).toFixed(1)}" y="${height - 2}">${esc(p.bucket)}</text>`
    : "").join("");
  return svg(width, height,
    `<path d="${area}" fill="${color}" fill-opacity="0.35" stroke="${color}"/>` + labels);
}

/** One small-multiple bar chart for a single district. */
export function renderSmallMultiple(
  name: string,
  buckets: string[],
  crime: number[],
  post: number[],
  width = 190,
  height = 80,
): string {
  const max = Math.max(1, ...crime, ...post);
  const n = Math.max(1, buckets.length);
  const band = width / n;
  const bars: string[] = [];
  for (let i = 0; i < buckets.length; i++) {
    const crimeH = (crime[i] / max) * (height - 26);
    const postH = (post[i] / max) * (height - 26);
    bars.push(`<rect class="bar-crime" x="${(i * band + 2).toFixed(1)}" ` +
      `y="${(height - 12 - crimeH).toFixed(1)}" width="${(band / 2 - 2).toFixed(1)}" ` +
      `height="${crimeH.toFixed(1)}" data-bucket="${esc(buckets[i])}" data-count="${crime[i]}"/>`);
    bars.push(`<rect class="bar-post" x="${(i * band + band / 2).toFixed(1)}" ` +
      `y="${(height - 12 - postH).toFixed(1)}" width="${(band / 2 - 2).toFixed(1)}" ` +
      `height="${postH.toFixed(1)}" data-bucket="${esc(buckets[i])}" data-count="${post[i]}"/>`);
  }
  return `<figure class="multiple"><figcaption>${esc(name)}</figcaption>` +
    svg(width, height, bars.join("")) + `</figure>`;
}

function svg(width: number, height: number, inner: string): string {
  return `<svg viewBox="0 0 ${width} ${height}" width="${width}" height="${height}" ` +
    `xmlns="http://www.w3.org/2000/svg">${inner}</svg>`;
}
