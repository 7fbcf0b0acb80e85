/** UI state store: selection, working spec, dirty tracking, undo history. */

import { ChromaKeySpec, specIssues, specsEqual } from "./spec.js";

export type DisplayMode = "original" | "matte" | "composite" | "blackout";

export interface Selection {
  task: string | null;
  episodeId: string | null;
  camera: string | null;
  frameIndex: number;
}

export class TunerStore {
  selection: Selection = { task: null, episodeId: null, camera: null, frameIndex: 0 };
  view: DisplayMode = "composite";
  redOverlay = false;
  latencyMs: number | null = null;
  keyedFraction: number | null = null;
  banner: string | null = null;

  private workingSpec: ChromaKeySpec = { keyHex: "#439f82", tola: 30, tolb: 35 };
  private manifestSpec: ChromaKeySpec | null = null;
  private history: ChromaKeySpec[] = [];
  private listeners = new Set<() => void>();

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  get spec(): ChromaKeySpec {
    return { ...this.workingSpec };
  }

  get issues(): string[] {
    return specIssues(this.workingSpec);
  }

  get valid(): boolean {
    return this.issues.length === 0;
  }

  /** Set exactly when the working spec differs from the manifest's. */
  get dirty(): boolean {
    return this.manifestSpec !== null && !specsEqual(this.workingSpec, this.manifestSpec);
  }

  get canUndo(): boolean {
    return this.history.length > 0;
  }

  /** Load the spec recorded in the selected task's manifests. */
  loadManifestSpec(spec: ChromaKeySpec): void {
    this.manifestSpec = { ...spec };
    this.workingSpec = { ...spec };
    this.history = [];
    this.emit();
  }

  editSpec(patch: Partial<ChromaKeySpec>, recordHistory = false): void {
    if (recordHistory) this.history.push({ ...this.workingSpec });
    this.workingSpec = { ...this.workingSpec, ...patch };
    this.emit();
  }

  /** Eyedrop picks record an undo point; slider noise does not. */
  applyEyedrop(keyHex: string): void {
    this.editSpec({ keyHex }, true);
  }

  undo(): void {
    const prev = this.history.pop();
    if (prev) {
      this.workingSpec = prev;
      this.emit();
    }
  }

  /** A successful save makes the working spec the manifest spec. */
  markSaved(): void {
    this.manifestSpec = { ...this.workingSpec };
    this.emit();
  }

  select(patch: Partial<Selection>): void {
    this.selection = { ...this.selection, ...patch };
    this.emit();
  }

  setView(view: DisplayMode): void {
    this.view = view;
    this.emit();
  }

  setPreviewInfo(latencyMs: number | null, keyedFraction: number | null): void {
    this.latencyMs = latencyMs;
    this.keyedFraction = keyedFraction;
    this.emit();
  }

  setBanner(text: string | null): void {
    this.banner = text;
    this.emit();
  }
}
