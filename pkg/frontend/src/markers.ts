/** Marker geometry and the rank-color convention shared with the archive. */

import type { PointDto } from "./types.js";

/** Rank 1 is green, 2 blue, 3 red; anything beyond renders gray. */
export const RANK_COLORS: Readonly<Record<number, string>> = {
  1: "green",
  2: "blue",
  3: "red",
};

export function markerColor(rank: number): string {
  return RANK_COLORS[rank] ?? "gray";
}

export interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

/**
 * The chip's back-projected rectangle on the mosaic: the camera re-shoots one
 * sub-image footprint centered on the point, so the box spans exactly
 * sub_width x sub_height mosaic pixels, clamped to the mosaic bounds.
 */
export function chipBox(
  point: Pick<PointDto, "x" | "y">,
  subWidth: number,
  subHeight: number,
  mosaicWidth: number,
  mosaicHeight: number,
): Box {
  const x0 = Math.max(0, point.x + 0.5 - subWidth / 2);
  const y0 = Math.max(0, point.y + 0.5 - subHeight / 2);
  const x1 = Math.min(mosaicWidth, x0 + subWidth);
  const y1 = Math.min(mosaicHeight, y0 + subHeight);
  return { x: x0, y: y0, w: x1 - x0, h: y1 - y0 };
}

/** Squared-distance hit test used when clicking markers on the canvas. */
export function nearestPoint(
  points: readonly PointDto[],
  x: number,
  y: number,
  radius: number,
): PointDto | null {
  let best: PointDto | null = null;
  let bestD = radius * radius;
  for (const p of points) {
    const d = (p.x - x) ** 2 + (p.y - y) ** 2;
    if (d <= bestD) {
      best = p;
      bestD = d;
    }
  }
  return best;
}
