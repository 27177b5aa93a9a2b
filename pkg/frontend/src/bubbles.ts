// Post-count bubbles for the overlay view. Radii are area-proportional
// so twice the posts reads as twice the ink, not twice the diameter.

export function bubbleRadius(
  count: number,
  maxCount: number,
  rMin: number,
  rMax: number,
): number | null {
  if (count <= 0) return null; // zero count: no bubble at all
  if (maxCount <= 0) return null;
  return rMin + (rMax - rMin) * Math.sqrt(count / maxCount);
}
