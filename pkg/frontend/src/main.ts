/** DOM wiring for the tuning page.  All logic that can live outside the
 * DOM is in the sibling modules; this file only binds them to elements. */

import { ApiClient, EpisodeInfo, InvalidSpecError, ViewMode } from "./api.js";
import { pickColour } from "./eyedrop.js";
import { redOverlay } from "./render.js";
import { Debouncer, SequenceGate } from "./scheduler.js";
import { fromWire } from "./spec.js";
import { TunerStore } from "./state.js";

const DEBOUNCE_MS = 100;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

async function decodeToImageData(bytes: Uint8Array): Promise<ImageData> {
  const bitmap = await createImageBitmap(new Blob([bytes as BlobPart], { type: "image/png" }));
  const canvas = document.createElement("canvas");
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(bitmap, 0, 0);
  return ctx.getImageData(0, 0, bitmap.width, bitmap.height);
}

class TunerPage {
  private api: ApiClient;
  private store = new TunerStore();
  private gate = new SequenceGate();
  private refresh = new Debouncer(DEBOUNCE_MS, () => void this.runPreview());
  private episodes: EpisodeInfo[] = [];
  private originalPixels: ImageData | null = null;
  private eyedropActive = false;

  private canvas = el<HTMLCanvasElement>("display");
  private taskSel = el<HTMLSelectElement>("task");
  private episodeSel = el<HTMLSelectElement>("episode");
  private cameraSel = el<HTMLSelectElement>("camera");
  private frameSlider = el<HTMLInputElement>("frame");
  private frameLabel = el<HTMLSpanElement>("frame-label");
  private keyInput = el<HTMLInputElement>("key-hex");
  private swatch = el<HTMLSpanElement>("swatch");
  private tolaSlider = el<HTMLInputElement>("tola");
  private tolbSlider = el<HTMLInputElement>("tolb");
  private tolaNum = el<HTMLInputElement>("tola-num");
  private tolbNum = el<HTMLInputElement>("tolb-num");
  private validity = el<HTMLDivElement>("validity");
  private saveBtn = el<HTMLButtonElement>("save");
  private undoBtn = el<HTMLButtonElement>("undo");
  private eyedropBtn = el<HTMLButtonElement>("eyedrop");
  private overlayChk = el<HTMLInputElement>("overlay");
  private statsOut = el<HTMLDivElement>("stats");
  private banner = el<HTMLDivElement>("banner");

  constructor() {
    this.api = new ApiClient(window.location.origin);
    this.bind();
    this.store.subscribe(() => this.renderControls());
    void this.loadTasks();
  }

  private bind(): void {
    this.taskSel.addEventListener("change", () => void this.onTaskChange());
    this.episodeSel.addEventListener("change", () => this.onEpisodeChange());
    this.cameraSel.addEventListener("change", () => {
      this.store.select({ camera: this.cameraSel.value });
      this.invalidateFrame();
    });
    this.frameSlider.addEventListener("input", () => {
      this.store.select({ frameIndex: Number(this.frameSlider.value) });
      this.invalidateFrame();
    });
    for (const mode of ["original", "matte", "composite", "blackout"] as const) {
      el<HTMLInputElement>(`view-${mode}`).addEventListener("change", () => {
        this.store.setView(mode);
        this.scheduleRefresh();
      });
    }
    this.keyInput.addEventListener("change", () => {
      this.store.editSpec({ keyHex: this.keyInput.value }, true);
      this.scheduleRefresh();
    });
    const bindTol = (slider: HTMLInputElement, num: HTMLInputElement, field: "tola" | "tolb") => {
      const apply = (value: string) => {
        this.store.editSpec({ [field]: Number(value) });
        slider.value = value;
        num.value = value;
        this.scheduleRefresh();
      };
      slider.addEventListener("input", () => apply(slider.value));
      num.addEventListener("change", () => apply(num.value));
    };
    bindTol(this.tolaSlider, this.tolaNum, "tola");
    bindTol(this.tolbSlider, this.tolbNum, "tolb");
    this.saveBtn.addEventListener("click", () => void this.save());
    this.undoBtn.addEventListener("click", () => {
      this.store.undo();
      this.scheduleRefresh();
    });
    this.eyedropBtn.addEventListener("click", () => {
      this.eyedropActive = !this.eyedropActive;
      this.eyedropBtn.classList.toggle("active", this.eyedropActive);
      this.canvas.classList.toggle("picking", this.eyedropActive);
    });
    this.overlayChk.addEventListener("change", () => {
      this.store.redOverlay = this.overlayChk.checked;
      this.scheduleRefresh();
    });
    this.canvas.addEventListener("click", (ev) => this.onCanvasClick(ev));
  }

  private sel() {
    const s = this.store.selection;
    if (!s.task || !s.episodeId || !s.camera) return null;
    return { task: s.task, episodeId: s.episodeId, camera: s.camera, frameIndex: s.frameIndex };
  }

  private async loadTasks(): Promise<void> {
    try {
      const tasks = await this.api.tasks();
      this.taskSel.replaceChildren(
        ...tasks.map((t) => new Option(`${t.task} (${t.episode_count})`, t.task)),
      );
      if (tasks.length) {
        this.taskSel.value = tasks[0].task;
        await this.onTaskChange();
      }
    } catch (err) {
      this.store.setBanner(`failed to load tasks: ${String(err)}`);
    }
  }

  private async onTaskChange(): Promise<void> {
    const task = this.taskSel.value;
    try {
      this.episodes = await this.api.episodes(task);
    } catch (err) {
      this.store.setBanner(`failed to load episodes: ${String(err)}`);
      return;
    }
    this.episodeSel.replaceChildren(...this.episodes.map((e) => new Option(e.episode_id)));
    this.store.select({ task, episodeId: this.episodes[0]?.episode_id ?? null });
    if (this.episodes.length) this.store.loadManifestSpec(fromWire(this.episodes[0].chroma));
    this.onEpisodeChange();
  }

  private onEpisodeChange(): void {
    const episode = this.episodes.find((e) => e.episode_id === this.episodeSel.value);
    if (!episode) return;
    this.cameraSel.replaceChildren(...episode.cameras.map((c) => new Option(c)));
    this.frameSlider.max = String(Math.max(0, episode.frame_count - 1));
    this.frameSlider.value = "0";
    this.store.select({
      episodeId: episode.episode_id,
      camera: episode.cameras[0] ?? null,
      frameIndex: 0,
    });
    this.invalidateFrame();
  }

  private invalidateFrame(): void {
    this.originalPixels = null;
    this.scheduleRefresh();
  }

  private scheduleRefresh(): void {
    this.refresh.trigger();
  }

  private async ensureOriginal(): Promise<ImageData | null> {
    const sel = this.sel();
    if (!sel) return null;
    if (!this.originalPixels) {
      const bytes = await this.api.fetchFrame(sel.task, sel.episodeId, sel.camera, sel.frameIndex);
      this.originalPixels = await decodeToImageData(bytes);
    }
    return this.originalPixels;
  }

  private draw(pixels: ImageData): void {
    this.canvas.width = pixels.width;
    this.canvas.height = pixels.height;
    this.canvas.getContext("2d")!.putImageData(pixels, 0, 0);
  }

  private async runPreview(): Promise<void> {
    const sel = this.sel();
    if (!sel) return;
    const ticket = this.gate.issue();
    try {
      const original = await this.ensureOriginal();
      if (!original) return;
      if (this.store.view === "original") {
        if (this.gate.accept(ticket)) {
          this.draw(original);
          this.store.setPreviewInfo(null, null);
          this.store.setBanner(null);
        }
        return;
      }
      if (!this.store.valid) return; // invalid specs never leave the client
      const result = await this.api.preview({
        ...sel,
        spec: this.store.spec,
        view: this.store.view as ViewMode,
      });
      if (!this.gate.accept(ticket)) return; // stale: a newer preview landed
      let pixels = await decodeToImageData(result.bytes);
      if (this.store.view === "matte" && this.store.redOverlay) {
        pixels = new ImageData(
          redOverlay(original.data, pixels.data, original.width, original.height),
          original.width,
          original.height,
        );
      }
      this.draw(pixels);
      this.store.setPreviewInfo(result.latencyMs, result.stats.keyed_fraction);
      this.store.setBanner(null);
    } catch (err) {
      // keep the last good preview on screen; surface the failure
      this.store.setBanner(String(err));
    }
  }

  private onCanvasClick(ev: MouseEvent): void {
    if (!this.eyedropActive || !this.originalPixels) return;
    const rect = this.canvas.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) / rect.width) * this.canvas.width;
    const y = ((ev.clientY - rect.top) / rect.height) * this.canvas.height;
    const colour = pickColour(this.originalPixels, x, y);
    if (colour === null) return; // clicks outside the frame are ignored
    this.store.applyEyedrop(colour);
    this.keyInput.value = colour;
    this.scheduleRefresh();
  }

  private async save(): Promise<void> {
    const task = this.store.selection.task;
    if (!task || !this.store.valid || !this.store.dirty) return;
    const spec = this.store.spec;
    try {
      const reply = await this.api.saveParams(task, spec);
      this.store.markSaved();
      this.store.setBanner(
        `saved ${spec.keyHex} tola=${spec.tola} tolb=${spec.tolb} ` +
        `to ${reply.episodes_updated} episode manifest(s)`,
      );
    } catch (err) {
      if (err instanceof InvalidSpecError) throw err; // unreachable: guarded above
      this.store.setBanner(`save failed, parameters kept: ${String(err)}`);
    }
  }

  private renderControls(): void {
    const spec = this.store.spec;
    if (document.activeElement !== this.keyInput) this.keyInput.value = spec.keyHex;
    this.swatch.style.background = spec.keyHex;
    if (document.activeElement !== this.tolaSlider && document.activeElement !== this.tolaNum) {
      this.tolaSlider.value = String(spec.tola);
      this.tolaNum.value = String(spec.tola);
    }
    if (document.activeElement !== this.tolbSlider && document.activeElement !== this.tolbNum) {
      this.tolbSlider.value = String(spec.tolb);
      this.tolbNum.value = String(spec.tolb);
    }
    const issues = this.store.issues;
    this.validity.textContent = issues.join("; ");
    this.validity.classList.toggle("hidden", issues.length === 0);
    this.saveBtn.disabled = !(this.store.dirty && this.store.valid);
    this.undoBtn.disabled = !this.store.canUndo;
    this.frameLabel.textContent = String(this.store.selection.frameIndex);
    const latency = this.store.latencyMs === null ? "-" : `${this.store.latencyMs.toFixed(0)} ms`;
    const keyed = this.store.keyedFraction === null
      ? "-"
      : `${(this.store.keyedFraction * 100).toFixed(1)}%`;
    this.statsOut.textContent = `preview ${latency} · keyed ${keyed}`;
    this.banner.textContent = this.store.banner ?? "";
    this.banner.classList.toggle("hidden", this.store.banner === null);
  }
}

if (typeof document !== "undefined" && document.getElementById("display")) {
  new TunerPage();
}
