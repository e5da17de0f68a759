import { decodePfm } from "./pfm.js";
import type { FloatMap, Location25D, Mode } from "./types.js";
import { bboxFromList, bboxToList } from "./types.js";

// Thin JSON client over the pipeline service. All raster math happens
// server-side; this module only encodes requests and decodes payloads.

export class ApiError extends Error {
  constructor(
    readonly kind: string,
    readonly detail: string,
    readonly status: number,
  ) {
    super(`${kind}: ${detail}`);
    this.name = "ApiError";
  }
}

let apiBase = "";

/** Point the client at another origin (tests, remote service). */
export function setApiBase(url: string): void {
  apiBase = url.replace(/\/+$/, "");
}

export function b64encode(bytes: Uint8Array): string {
  let bin = "";
  for (let i = 0; i < bytes.length; i += 0x8000) {
    bin += String.fromCharCode(...bytes.subarray(i, i + 0x8000));
  }
  return btoa(bin);
}

export function b64decode(text: string): Uint8Array {
  const bin = atob(text);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

interface Payload {
  encoding: string;
  data: string;
}

function pngPayload(bytes: Uint8Array): Payload {
  return { encoding: "png_b64", data: b64encode(bytes) };
}

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let kind = `HTTP ${res.status}`;
  let detail = res.statusText;
  try {
    const body = (await res.json()) as { error?: string; detail?: unknown };
    if (body.error) kind = body.error;
    if (body.detail !== undefined) detail = JSON.stringify(body.detail).replace(/^"|"$/g, "");
  } catch {
    // non-JSON error body; keep the HTTP status text
  }
  throw new ApiError(kind, detail, res.status);
}

async function post(path: string, body: unknown): Promise<Response> {
  let res: Response;
  try {
    res = await fetch(`${apiBase}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  } catch (err) {
    throw new ApiError("ServiceUnreachable", String(err), 0);
  }
  await raiseForStatus(res);
  return res;
}

export interface PlacementParams {
  background: Uint8Array;
  reference: Uint8Array;
  location: Location25D;
  mode: Mode;
  maskLevel: number;
  lambda: number;
  s: number;
  seed: number;
}

/** Wire body shared by the compose and export endpoints. */
export function composeBody(p: PlacementParams): Record<string, unknown> {
  return {
    background: pngPayload(p.background),
    reference: pngPayload(p.reference),
    location: { bbox: bboxToList(p.location.bbox), depth: p.location.depth },
    mode: p.mode,
    mask_level: p.maskLevel,
    lambda: p.lambda,
    s: p.s,
    seed: p.seed,
  };
}

export interface PreviewSet {
  /** Full-frame composite. */
  output: Uint8Array;
  /** Working-crop collage (scene with the detail map stitched in). */
  collage: Uint8Array;
  detailMap: Uint8Array;
  fusedDepth: FloatMap;
  location: Location25D;
}

export async function composePreview(p: PlacementParams): Promise<PreviewSet> {
  const res = await post("/api/compose", composeBody(p));
  const body = await res.json();
  return {
    output: b64decode(body.output.data),
    collage: b64decode(body.collage.data),
    detailMap: b64decode(body.detail_map.data),
    fusedDepth: decodePfm(b64decode(body.fused_depth.data)),
    location: { bbox: bboxFromList(body.location.bbox), depth: body.location.depth },
  };
}

export async function fetchDepth(imagePng: Uint8Array): Promise<FloatMap> {
  const res = await post("/api/depth", { image: pngPayload(imagePng) });
  const body = await res.json();
  return decodePfm(b64decode(body.depth.data));
}

export interface AnnotationInstance {
  id: string;
  name: string;
  bbox: number[];
}

export async function proposeLocation(
  backgroundPng: Uint8Array,
  instruction: string,
  instances: AnnotationInstance[] | null,
): Promise<{ location: Location25D; rawText: string }> {
  const res = await post("/api/locate", {
    background: pngPayload(backgroundPng),
    instruction,
    annotations: instances && instances.length ? { instances } : null,
  });
  const body = await res.json();
  return {
    location: { bbox: bboxFromList(body.location.bbox), depth: body.location.depth },
    rawText: body.raw_text,
  };
}

export async function sha256Hex(bytes: Uint8Array): Promise<string> {
  const digest = await crypto.subtle.digest("SHA-256", bytes as BufferSource);
  return [...new Uint8Array(digest)].map((b) => b.toString(16).padStart(2, "0")).join("");
}

/** Bundle archive for the current parameters; filename embeds the content hash. */
export async function exportBundle(
  p: PlacementParams,
): Promise<{ bytes: Uint8Array; filename: string }> {
  const res = await post("/api/export-bundle", composeBody(p));
  const bytes = new Uint8Array(await res.arrayBuffer());
  const hash = await sha256Hex(bytes);
  return { bytes, filename: `bundle-${hash.slice(0, 12)}.zip` };
}
