import {
  ApiError,
  composePreview,
  exportBundle,
  fetchDepth,
  proposeLocation,
  type AnnotationInstance,
} from "./api.js";
import { cursorFor, dragBox, drawBoxOutline, hitTest, paintHeatmap, type Handle } from "./canvas.js";
import { StudioStore, type SessionState } from "./state.js";
import type { Mode } from "./types.js";
import { MODES } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const bgInput = el<HTMLInputElement>("bg-file");
const refInput = el<HTMLInputElement>("ref-file");
const frame = el<HTMLCanvasElement>("frame");
const depthSlider = el<HTMLInputElement>("depth");
const depthValue = el<HTMLSpanElement>("depth-value");
const maskLevel = el<HTMLSelectElement>("mask-level");
const lambdaInput = el<HTMLInputElement>("lambda");
const sInput = el<HTMLInputElement>("guidance");
const modeSelect = el<HTMLSelectElement>("mode");
const seedInput = el<HTMLInputElement>("seed");
const instructionInput = el<HTMLInputElement>("instruction");
const annotationsInput = el<HTMLTextAreaElement>("annotations");
const proposeBtn = el<HTMLButtonElement>("propose");
const acceptBtn = el<HTMLButtonElement>("accept-ghost");
const rejectBtn = el<HTMLButtonElement>("reject-ghost");
const exportBtn = el<HTMLButtonElement>("export");
const banner = el<HTMLDivElement>("banner");
const statusLine = el<HTMLSpanElement>("status");
const fusedCanvas = el<HTMLCanvasElement>("fused-view");
const collageImg = el<HTMLImageElement>("collage-view");
const compositeImg = el<HTMLImageElement>("composite-view");

for (const mode of MODES) {
  const opt = document.createElement("option");
  opt.value = mode;
  opt.textContent = mode;
  modeSelect.appendChild(opt);
}

const store = new StudioStore(composePreview);

let backgroundBitmap: ImageBitmap | null = null;
let collageUrl: string | null = null;
let compositeUrl: string | null = null;

function showError(err: unknown): void {
  store.setBanner(err instanceof ApiError ? `${err.kind}: ${err.detail}` : String(err));
}

function pngUrl(bytes: Uint8Array, old: string | null): string {
  if (old) URL.revokeObjectURL(old);
  return URL.createObjectURL(new Blob([bytes.slice().buffer], { type: "image/png" }));
}

async function fileBytes(input: HTMLInputElement): Promise<Uint8Array | null> {
  const file = input.files?.[0];
  if (!file) return null;
  return new Uint8Array(await file.arrayBuffer());
}

async function loadAssets(): Promise<void> {
  const bg = await fileBytes(bgInput);
  const ref = await fileBytes(refInput);
  if (!bg || !ref) return;
  try {
    // Decode locally first so a corrupt file leaves the session untouched.
    const bitmap = await createImageBitmap(new Blob([bg.slice().buffer]));
    await createImageBitmap(new Blob([ref.slice().buffer]));
    const depth = await fetchDepth(bg);
    backgroundBitmap = bitmap;
    frame.width = bitmap.width;
    frame.height = bitmap.height;
    store.setAssets(bg, ref, depth);
  } catch (err) {
    showError(err instanceof ApiError ? err : new ApiError("DecodeFailure", String(err), 0));
  }
}

bgInput.addEventListener("change", () => void loadAssets());
refInput.addEventListener("change", () => void loadAssets());

// --- bbox editing -----------------------------------------------------------

let activeHandle: Handle | null = null;
let lastPointer: [number, number] | null = null;

function pointerNorm(ev: PointerEvent): [number, number] {
  const rect = frame.getBoundingClientRect();
  return [(ev.clientX - rect.left) / rect.width, (ev.clientY - rect.top) / rect.height];
}

frame.addEventListener("pointerdown", (ev) => {
  const [x, y] = pointerNorm(ev);
  activeHandle = hitTest(store.state.location.bbox, x, y);
  lastPointer = [x, y];
  if (activeHandle) frame.setPointerCapture(ev.pointerId);
});

frame.addEventListener("pointermove", (ev) => {
  const [x, y] = pointerNorm(ev);
  if (!activeHandle || !lastPointer) {
    frame.style.cursor = cursorFor(hitTest(store.state.location.bbox, x, y));
    return;
  }
  const [px, py] = lastPointer;
  lastPointer = [x, y];
  const bbox = dragBox(store.state.location.bbox, activeHandle, x - px, y - py);
  store.setLocation({ bbox, depth: store.state.location.depth });
});

frame.addEventListener("pointerup", () => {
  activeHandle = null;
  lastPointer = null;
});

// --- controls ---------------------------------------------------------------

depthSlider.addEventListener("input", () => store.setDepth(Number(depthSlider.value)));
maskLevel.addEventListener("change", () => store.setMaskLevel(Number(maskLevel.value)));
lambdaInput.addEventListener("change", () => store.setLambda(Number(lambdaInput.value)));
sInput.addEventListener("change", () => store.setGuidanceScale(Number(sInput.value)));
modeSelect.addEventListener("change", () => store.setMode(modeSelect.value as Mode));
seedInput.addEventListener("change", () => store.setSeed(Number(seedInput.value)));

function parseAnnotations(): AnnotationInstance[] | null {
  const text = annotationsInput.value.trim();
  if (!text) return null;
  const doc = JSON.parse(text) as { instances?: AnnotationInstance[] } | AnnotationInstance[];
  return Array.isArray(doc) ? doc : (doc.instances ?? null);
}

proposeBtn.addEventListener("click", () => {
  void (async () => {
    const bg = await fileBytes(bgInput);
    const text = instructionInput.value.trim();
    if (!bg || !text) return;
    try {
      const { location, rawText } = await proposeLocation(bg, text, parseAnnotations());
      store.setGhost({ location, rawText });
      store.setBanner(null);
    } catch (err) {
      showError(err);
    }
  })();
});

acceptBtn.addEventListener("click", () => store.acceptGhost());
rejectBtn.addEventListener("click", () => store.rejectGhost());

exportBtn.addEventListener("click", () => {
  void (async () => {
    if (!store.canExport()) {
      store.setBanner("Previews are out of date; wait for the render to finish before exporting.");
      return;
    }
    try {
      const { bytes, filename } = await exportBundle(store.requestParams());
      const a = document.createElement("a");
      a.href = pngUrl(bytes, null);
      a.download = filename;
      a.click();
      URL.revokeObjectURL(a.href);
    } catch (err) {
      showError(err);
    }
  })();
});

// --- rendering --------------------------------------------------------------

function renderFrame(state: SessionState): void {
  const ctx = frame.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, frame.width, frame.height);
  if (backgroundBitmap) ctx.drawImage(backgroundBitmap, 0, 0, frame.width, frame.height);
  drawBoxOutline(ctx, state.location.bbox, "#ff3d6e");
  if (state.ghost) drawBoxOutline(ctx, state.ghost.location.bbox, "#31c48d", true);
}

function render(state: SessionState): void {
  renderFrame(state);
  depthSlider.value = String(state.location.depth);
  depthValue.textContent = state.location.depth.toFixed(3);
  banner.textContent = state.banner ?? "";
  banner.style.display = state.banner ? "block" : "none";
  statusLine.textContent = state.pending
    ? "rendering..."
    : state.previews
      ? "previews current"
      : "no previews yet";
  const ghostVisible = state.ghost !== null;
  acceptBtn.disabled = !ghostVisible;
  rejectBtn.disabled = !ghostVisible;
  exportBtn.disabled = !store.canExport();

  if (state.previews && state.previewParams === store.paramsKey()) {
    paintHeatmap(fusedCanvas, state.previews.fusedDepth);
    collageUrl = pngUrl(state.previews.collage, collageUrl);
    collageImg.src = collageUrl;
    compositeUrl = pngUrl(state.previews.output, compositeUrl);
    compositeImg.src = compositeUrl;
  }
}

store.subscribe(render);
render(store.state);
