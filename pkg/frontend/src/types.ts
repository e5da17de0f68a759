// Shared studio vocabulary. Boxes and depths are frame-normalized to [0,1];
// depth follows the service convention: larger values sit nearer the camera.

export interface BBox {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface Location25D {
  bbox: BBox;
  depth: number;
}

export type Mode = "place" | "replace" | "id_transfer" | "inpaint";

export const MODES: readonly Mode[] = ["place", "replace", "id_transfer", "inpaint"];

/** Row-major single-channel float raster, top row first. */
export interface FloatMap {
  width: number;
  height: number;
  data: Float32Array;
}

export function bboxToList(b: BBox): number[] {
  return [b.x1, b.y1, b.x2, b.y2];
}

export function bboxFromList(v: readonly number[]): BBox {
  if (v.length !== 4) throw new Error(`bbox needs 4 numbers, got ${v.length}`);
  return { x1: v[0], y1: v[1], x2: v[2], y2: v[3] };
}

function clamp01(v: number): number {
  return v < 0 ? 0 : v > 1 ? 1 : v;
}

/**
 * Force a box to be valid: corners ordered, inside the unit frame, and at
 * least minSide wide and tall. Oversized boxes are clamped, undersized ones
 * grown around their center, and out-of-frame boxes shifted back in, so an
 * edit can never produce a box the server would reject.
 */
export function clampBBox(b: BBox, minSide = 0.02): BBox {
  let x1 = Math.min(b.x1, b.x2);
  let x2 = Math.max(b.x1, b.x2);
  let y1 = Math.min(b.y1, b.y2);
  let y2 = Math.max(b.y1, b.y2);

  const side = Math.min(minSide, 1);
  if (x2 - x1 < side) {
    const cx = (x1 + x2) / 2;
    x1 = cx - side / 2;
    x2 = cx + side / 2;
  }
  if (y2 - y1 < side) {
    const cy = (y1 + y2) / 2;
    y1 = cy - side / 2;
    y2 = cy + side / 2;
  }

  const w = Math.min(x2 - x1, 1);
  const h = Math.min(y2 - y1, 1);
  x1 = clamp01(Math.min(x1, 1 - w));
  y1 = clamp01(Math.min(y1, 1 - h));
  return { x1, y1, x2: x1 + w, y2: y1 + h };
}

export function clampDepth(d: number): number {
  return Number.isFinite(d) ? clamp01(d) : 0;
}

/** Depth sample at the pixel under the box center. */
export function depthAtBoxCenter(map: FloatMap, b: BBox): number {
  const col = Math.min(map.width - 1, Math.max(0, Math.floor(((b.x1 + b.x2) / 2) * map.width)));
  const row = Math.min(map.height - 1, Math.max(0, Math.floor(((b.y1 + b.y2) / 2) * map.height)));
  return map.data[row * map.width + col];
}

/** Default placement for freshly loaded assets: centered, 20% of frame width. */
export function defaultBox(frameWidth: number, frameHeight: number): BBox {
  const w = 0.2;
  const h = frameHeight > 0 ? Math.min(1, (0.2 * frameWidth) / frameHeight) : 0.2;
  return clampBBox({ x1: 0.5 - w / 2, y1: 0.5 - h / 2, x2: 0.5 + w / 2, y2: 0.5 + h / 2 });
}
