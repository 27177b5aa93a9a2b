// Lon/lat to SVG projection and polygon path building. District
// polygons are small enough that a plain equirectangular fit (lon -> x,
// lat -> -y, uniform scale) is faithful; no basemap, no tiles.

import type { Feature, FeatureCollection } from "./types";

export interface Projection {
  x(lon: number): number;
  y(lat: number): number;
  width: number;
  height: number;
}

function eachRing(feature: Feature, fn: (ring: number[][]) => void): void {
  const geom = feature.geometry;
  if (geom.type === "Polygon") {
    for (const ring of geom.coordinates) fn(ring);
  } else {
    for (const poly of geom.coordinates) for (const ring of poly) fn(ring);
  }
}

export function fitProjection(
  collection: FeatureCollection,
  width: number,
  height: number,
  padding = 8,
): Projection {
  let minLon = Infinity, maxLon = -Infinity, minLat = Infinity, maxLat = -Infinity;
  for (const feature of collection.features) {
    eachRing(feature, (ring) => {
      for (const [lon, lat] of ring) {
        if (lon < minLon) minLon = lon;
        if (lon > maxLon) maxLon = lon;
        if (lat < minLat) minLat = lat;
        if (lat > maxLat) maxLat = lat;
      }
    });
  }
  if (!Number.isFinite(minLon)) {
    minLon = 0; maxLon = 1; minLat = 0; maxLat = 1;
  }
  const spanLon = maxLon - minLon || 1;
  const spanLat = maxLat - minLat || 1;
  const scale = Math.min((width - 2 * padding) / spanLon,
                         (height - 2 * padding) / spanLat);
  const xOff = (width - spanLon * scale) / 2;
  const yOff = (height - spanLat * scale) / 2;
  return {
    width,
    height,
    x: (lon) => xOff + (lon - minLon) * scale,
    y: (lat) => yOff + (maxLat - lat) * scale, // north up
  };
}

export function featurePath(feature: Feature, proj: Projection): string {
  const parts: string[] = [];
  eachRing(feature, (ring) => {
    const cmds = ring.map(([lon, lat], i) =>
      `${i === 0 ? "M" : "L"}${proj.x(lon).toFixed(2)},${proj.y(lat).toFixed(2)}`);
    parts.push(cmds.join("") + "Z");
  });
  return parts.join("");
}

/** Area-weighted centroid of the feature's first exterior ring. */
export function featureCentroid(feature: Feature): [number, number] {
  const geom = feature.geometry;
  const ring = geom.type === "Polygon" ? geom.coordinates[0] : geom.coordinates[0][0];
  let area = 0, cx = 0, cy = 0;
  for (let i = 0; i < ring.length - 1; i++) {
    const [x1, y1] = ring[i];
    const [x2, y2] = ring[i + 1];
    const cross = x1 * y2 - x2 * y1;
    area += cross;
    cx += (x1 + x2) * cross;
    cy += (y1 + y2) * cross;
  }
  if (area === 0) return [ring[0][0], ring[0][1]];
  return [cx / (3 * area), cy / (3 * area)];
}
