/** Typed client for the preview service HTTP API.
 *
 * The fetch implementation is injectable so tests can drive the client
 * against a recording proxy.  Requests carrying a chroma spec are
 * validated first and never leave the client when invalid.
 */

import { ChromaKeySpec, specIssues, toWire, WireSpec } from "./spec.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface TaskInfo {
  task: string;
  episode_count: number;
  chroma: WireSpec;
}

export interface EpisodeInfo {
  episode_id: string;
  cameras: string[];
  frame_count: number;
  fps: number | null;
  chroma: WireSpec;
}

export interface MatteStats {
  keyed_fraction: number;
  mean_alpha: number;
}

export type ViewMode = "matte" | "composite" | "blackout";

export interface TextureDescriptor {
  kind: "solid" | "perlin" | "library";
  [key: string]: unknown;
}

export interface PreviewArgs {
  task: string;
  episodeId: string;
  camera: string;
  frameIndex: number;
  spec: ChromaKeySpec;
  view: ViewMode;
  texture?: TextureDescriptor;
  seed?: number;
}

export interface PreviewResult {
  bytes: Uint8Array;
  stats: MatteStats;
  latencyMs: number;
}

export class InvalidSpecError extends Error {
  constructor(public issues: string[]) {
    super(`refusing to send invalid spec: ${issues.join("; ")}`);
  }
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(`${status}: ${message}`);
  }
}

async function errorMessage(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { error?: string };
    return body.error ?? resp.statusText;
  } catch {
    return resp.statusText;
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private guardSpec(spec: ChromaKeySpec): void {
    const issues = specIssues(spec);
    if (issues.length) throw new InvalidSpecError(issues);
  }

  async tasks(): Promise<TaskInfo[]> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/tasks`);
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as TaskInfo[];
  }

  async episodes(task: string): Promise<EpisodeInfo[]> {
    const resp = await this.fetchImpl(
      `${this.baseUrl}/api/episodes?task=${encodeURIComponent(task)}`,
    );
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as EpisodeInfo[];
  }

  frameUrl(task: string, episodeId: string, camera: string, frameIndex: number): string {
    const q = new URLSearchParams({
      task,
      episode: episodeId,
      camera,
      index: String(frameIndex),
    });
    return `${this.baseUrl}/api/frame?${q}`;
  }

  async fetchFrame(task: string, episodeId: string, camera: string, frameIndex: number): Promise<Uint8Array> {
    const resp = await this.fetchImpl(this.frameUrl(task, episodeId, camera, frameIndex));
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return new Uint8Array(await resp.arrayBuffer());
  }

  async preview(args: PreviewArgs): Promise<PreviewResult> {
    this.guardSpec(args.spec);
    const body: Record<string, unknown> = {
      task: args.task,
      episode_id: args.episodeId,
      camera: args.camera,
      frame_index: args.frameIndex,
      spec: toWire(args.spec),
      view: args.view,
    };
    if (args.texture) body.texture = args.texture;
    if (args.seed !== undefined) body.seed = args.seed;
    const started = performance.now();
    const resp = await this.fetchImpl(`${this.baseUrl}/api/preview`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const latencyMs = performance.now() - started;
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    const statsHeader = resp.headers.get("X-Matte-Stats");
    const stats = (statsHeader ? JSON.parse(statsHeader) : { keyed_fraction: NaN, mean_alpha: NaN }) as MatteStats;
    return { bytes: new Uint8Array(await resp.arrayBuffer()), stats, latencyMs };
  }

  async saveParams(task: string, spec: ChromaKeySpec): Promise<{ episodes_updated: number }> {
    this.guardSpec(spec);
    const resp = await this.fetchImpl(`${this.baseUrl}/api/params`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ task, spec: toWire(spec) }),
    });
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as { episodes_updated: number };
  }
}
