import type { FloatMap } from "./types.js";

// Fixed perceptual ramp (viridis anchor points, linearly interpolated) so
// depth heatmaps look the same in every screenshot and review.

export const HEAT_STOPS: ReadonlyArray<readonly [number, number, number]> = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

/** Map t in [0,1] (clamped) onto the ramp. */
export function heatColor(t: number): [number, number, number] {
  const x = Number.isFinite(t) ? (t < 0 ? 0 : t > 1 ? 1 : t) : 0;
  const pos = x * (HEAT_STOPS.length - 1);
  const i = Math.min(Math.floor(pos), HEAT_STOPS.length - 2);
  const f = pos - i;
  const a = HEAT_STOPS[i];
  const b = HEAT_STOPS[i + 1];
  return [
    Math.round(a[0] + (b[0] - a[0]) * f),
    Math.round(a[1] + (b[1] - a[1]) * f),
    Math.round(a[2] + (b[2] - a[2]) * f),
  ];
}

/** RGBA pixels for a float map, ready for ImageData. */
export function heatmapRgba(map: FloatMap): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(new ArrayBuffer(map.width * map.height * 4));
  for (let i = 0; i < map.data.length; i++) {
    const [r, g, b] = heatColor(map.data[i]);
    out[i * 4] = r;
    out[i * 4 + 1] = g;
    out[i * 4 + 2] = b;
    out[i * 4 + 3] = 255;
  }
  return out;
}
