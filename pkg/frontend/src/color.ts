// Choropleth color encoding: a 7-bin quantize scale with bin 0 reserved
// for exact zero, so "no data at all" reads differently from "low".

export const CHOROPLETH_COLORS = [
  "#f2f0f7", // bin 0: exactly zero
  "#dadaeb",
  "#bcbddc",
  "#9e9ac8",
  "#807dba",
  "#6a51a3",
  "#4a1486",
];

export const BIN_COUNT = CHOROPLETH_COLORS.length; // 7

export interface ColorScale {
  max: number;
  binOf(value: number): number;
  colorOf(value: number): string;
  /** One label per bin, for the legend. */
  legend(): string[];
}

export function makeColorScale(max: number): ColorScale {
  const quantizeBins = BIN_COUNT - 1; // bins 1..6 carry the nonzero range
  const binOf = (value: number): number => {
    if (value <= 0) return 0;
    if (max <= 0) return 1;
    const idx = Math.floor((value / max) * quantizeBins);
    return 1 + Math.min(quantizeBins - 1, idx);
  };
  const legend = (): string[] => {
    const labels = ["0"];
    for (let bin = 1; bin <= quantizeBins; bin++) {
      const lo = Math.floor(((bin - 1) / quantizeBins) * max);
      const hi = Math.floor((bin / quantizeBins) * max);
      labels.push(bin === 1 ? `1 – ${hi}` : `${lo + 1} – ${hi}`);
    }
    return labels;
  };
  return {
    max,
    binOf,
    colorOf: (value: number) => CHOROPLETH_COLORS[binOf(value)],
    legend,
  };
}
