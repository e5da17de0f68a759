import type { PlacementParams, PreviewSet } from "./api.js";
import type { FloatMap, Location25D, Mode } from "./types.js";
import { clampBBox, clampDepth, defaultBox, depthAtBoxCenter } from "./types.js";

// Session state machine. Concurrency rule: requests carry monotonic sequence
// numbers and only the newest issued request may write previews back, so the
// final render always reflects the last edit (last write wins).

export class SequenceGate {
  private nextSeq = 1;
  private newestIssued = 0;
  private newestApplied = 0;

  issue(): number {
    this.newestIssued = this.nextSeq;
    this.nextSeq += 1;
    return this.newestIssued;
  }

  /** True when this response is the newest in flight; stale ones are dropped. */
  accept(seq: number): boolean {
    if (seq !== this.newestIssued || seq <= this.newestApplied) return false;
    this.newestApplied = seq;
    return true;
  }
}

/** Trailing-edge debounce: the server is hit once the user pauses. */
export class Debouncer {
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(readonly delayMs = 150) {}

  schedule(fn: () => void): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      fn();
    }, this.delayMs);
  }

  cancel(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
  }
}

export interface Ghost {
  location: Location25D;
  rawText: string;
}

export interface SessionState {
  location: Location25D;
  mode: Mode;
  maskLevel: number;
  lambda: number;
  s: number;
  seed: number;
  previews: PreviewSet | null;
  /** Parameter key of the request that produced `previews`. */
  previewParams: string | null;
  ghost: Ghost | null;
  banner: string | null;
  pending: boolean;
}

export type RenderFn = (params: PlacementParams) => Promise<PreviewSet>;

function describeError(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export class StudioStore {
  state: SessionState = {
    location: { bbox: { x1: 0.4, y1: 0.4, x2: 0.6, y2: 0.6 }, depth: 0.5 },
    mode: "place",
    maskLevel: 2,
    lambda: 1.0,
    s: 1.0,
    seed: 0,
    previews: null,
    previewParams: null,
    ghost: null,
    banner: null,
    pending: false,
  };

  private background: Uint8Array | null = null;
  private reference: Uint8Array | null = null;
  private gate = new SequenceGate();
  private debounce: Debouncer;
  private listeners = new Set<(s: SessionState) => void>();

  constructor(
    private render: RenderFn,
    debounceMs = 150,
  ) {
    this.debounce = new Debouncer(debounceMs);
  }

  subscribe(fn: (s: SessionState) => void): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private update(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  get hasAssets(): boolean {
    return this.background !== null && this.reference !== null;
  }

  /** Everything a request depends on; previews are current iff keys match. */
  paramsKey(): string {
    const { location, mode, maskLevel, lambda, s, seed } = this.state;
    return JSON.stringify([
      location.bbox.x1,
      location.bbox.y1,
      location.bbox.x2,
      location.bbox.y2,
      location.depth,
      mode,
      maskLevel,
      lambda,
      s,
      seed,
    ]);
  }

  requestParams(): PlacementParams {
    if (!this.background || !this.reference) throw new Error("assets not loaded");
    return {
      background: this.background,
      reference: this.reference,
      location: this.state.location,
      mode: this.state.mode,
      maskLevel: this.state.maskLevel,
      lambda: this.state.lambda,
      s: this.state.s,
      seed: this.state.seed,
    };
  }

  /** New images reset the placement to the default centered box. */
  setAssets(background: Uint8Array, reference: Uint8Array, bgDepth: FloatMap): void {
    this.background = background;
    this.reference = reference;
    const bbox = defaultBox(bgDepth.width, bgDepth.height);
    const depth = clampDepth(depthAtBoxCenter(bgDepth, bbox));
    this.update({
      location: { bbox, depth },
      previews: null,
      previewParams: null,
      ghost: null,
      banner: null,
    });
    this.scheduleRefresh();
  }

  setLocation(loc: Location25D): void {
    this.update({
      location: { bbox: clampBBox(loc.bbox), depth: clampDepth(loc.depth) },
    });
    this.scheduleRefresh();
  }

  setDepth(depth: number): void {
    this.setLocation({ bbox: this.state.location.bbox, depth });
  }

  setMaskLevel(level: number): void {
    const v = Math.min(5, Math.max(1, Math.round(level)));
    this.update({ maskLevel: v });
    this.scheduleRefresh();
  }

  setLambda(lambda: number): void {
    this.update({ lambda: Math.max(0, lambda) });
    this.scheduleRefresh();
  }

  setGuidanceScale(s: number): void {
    this.update({ s: Math.max(0, s) });
    this.scheduleRefresh();
  }

  setMode(mode: Mode): void {
    this.update({ mode });
    this.scheduleRefresh();
  }

  setSeed(seed: number): void {
    this.update({ seed: Math.round(seed) });
    this.scheduleRefresh();
  }

  setGhost(ghost: Ghost | null): void {
    this.update({ ghost });
  }

  acceptGhost(): void {
    const ghost = this.state.ghost;
    if (!ghost) return;
    this.update({ ghost: null });
    this.setLocation(ghost.location);
  }

  rejectGhost(): void {
    this.update({ ghost: null });
  }

  setBanner(text: string | null): void {
    this.update({ banner: text });
  }

  /** Exporting is allowed only when previews match the current parameters. */
  canExport(): boolean {
    return (
      this.hasAssets &&
      this.state.previews !== null &&
      this.state.previewParams === this.paramsKey()
    );
  }

  private scheduleRefresh(): void {
    if (!this.hasAssets) return;
    this.debounce.schedule(() => void this.refresh());
  }

  async refresh(): Promise<void> {
    if (!this.hasAssets) return;
    const key = this.paramsKey();
    const seq = this.gate.issue();
    this.update({ pending: true });
    try {
      const previews = await this.render(this.requestParams());
      if (!this.gate.accept(seq)) return;
      this.update({ previews, previewParams: key, banner: null, pending: false });
    } catch (err) {
      if (!this.gate.accept(seq)) return;
      // Previews keep the last good state; only the banner reports the error.
      this.update({ banner: describeError(err), pending: false });
    }
  }
}
