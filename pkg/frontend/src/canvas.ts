import { heatmapRgba } from "./colormap.js";
import type { BBox, FloatMap } from "./types.js";
import { clampBBox } from "./types.js";

// Box-editor geometry (pure, normalized coordinates) plus the thin canvas
// drawing helpers used by the page.

export type Handle = "move" | "nw" | "ne" | "sw" | "se" | "n" | "s" | "e" | "w";

export function hitTest(box: BBox, x: number, y: number, tol = 0.015): Handle | null {
  const nearL = Math.abs(x - box.x1) <= tol;
  const nearR = Math.abs(x - box.x2) <= tol;
  const nearT = Math.abs(y - box.y1) <= tol;
  const nearB = Math.abs(y - box.y2) <= tol;
  const insideX = x >= box.x1 - tol && x <= box.x2 + tol;
  const insideY = y >= box.y1 - tol && y <= box.y2 + tol;

  if (nearL && nearT) return "nw";
  if (nearR && nearT) return "ne";
  if (nearL && nearB) return "sw";
  if (nearR && nearB) return "se";
  if (nearT && insideX) return "n";
  if (nearB && insideX) return "s";
  if (nearL && insideY) return "w";
  if (nearR && insideY) return "e";
  if (x > box.x1 && x < box.x2 && y > box.y1 && y < box.y2) return "move";
  return null;
}

/** Apply a drag delta to a handle; the result is always a valid in-frame box. */
export function dragBox(box: BBox, handle: Handle, dx: number, dy: number, minSide = 0.02): BBox {
  if (handle === "move") {
    const w = box.x2 - box.x1;
    const h = box.y2 - box.y1;
    const x1 = Math.min(Math.max(box.x1 + dx, 0), 1 - w);
    const y1 = Math.min(Math.max(box.y1 + dy, 0), 1 - h);
    return { x1, y1, x2: x1 + w, y2: y1 + h };
  }
  let { x1, y1, x2, y2 } = box;
  if (handle.includes("w")) x1 = Math.min(x1 + dx, x2 - minSide);
  if (handle.includes("e")) x2 = Math.max(x2 + dx, x1 + minSide);
  if (handle.includes("n")) y1 = Math.min(y1 + dy, y2 - minSide);
  if (handle.includes("s")) y2 = Math.max(y2 + dy, y1 + minSide);
  return clampBBox({ x1, y1, x2, y2 }, minSide);
}

export function cursorFor(handle: Handle | null): string {
  switch (handle) {
    case "move":
      return "move";
    case "nw":
    case "se":
      return "nwse-resize";
    case "ne":
    case "sw":
      return "nesw-resize";
    case "n":
    case "s":
      return "ns-resize";
    case "e":
    case "w":
      return "ew-resize";
    default:
      return "crosshair";
  }
}

export function drawBoxOutline(
  ctx: CanvasRenderingContext2D,
  box: BBox,
  color: string,
  dashed = false,
): void {
  const { width, height } = ctx.canvas;
  ctx.save();
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.setLineDash(dashed ? [6, 4] : []);
  ctx.strokeRect(
    box.x1 * width,
    box.y1 * height,
    (box.x2 - box.x1) * width,
    (box.y2 - box.y1) * height,
  );
  if (!dashed) {
    ctx.fillStyle = color;
    for (const [hx, hy] of [
      [box.x1, box.y1],
      [box.x2, box.y1],
      [box.x1, box.y2],
      [box.x2, box.y2],
    ]) {
      ctx.fillRect(hx * width - 3, hy * height - 3, 6, 6);
    }
  }
  ctx.restore();
}

/** Paint a float map as a heatmap at native resolution; CSS handles scaling. */
export function paintHeatmap(canvas: HTMLCanvasElement, map: FloatMap): void {
  canvas.width = map.width;
  canvas.height = map.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.putImageData(new ImageData(heatmapRgba(map), map.width, map.height), 0, 0);
}
