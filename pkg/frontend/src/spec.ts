/** Chroma key spec handling shared by every UI module.
 *
 * Validation mirrors the server rules exactly; the client refuses to send
 * a spec the server would reject (tola must be strictly below tolb).
 */

export interface ChromaKeySpec {
  keyHex: string; // "#rrggbb"
  tola: number;
  tolb: number;
}

export interface WireSpec {
  key_hex: string;
  tola: number;
  tolb: number;
}

const HEX_RE = /^#?([0-9a-fA-F]{6})$/;

export function parseHexColour(text: string): [number, number, number] | null {
  const m = HEX_RE.exec(text.trim());
  if (!m) return null;
  const v = parseInt(m[1], 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

export function formatHexColour(rgb: readonly [number, number, number]): string {
  const clamp = (c: number) => Math.max(0, Math.min(255, Math.round(c)));
  return "#" + rgb.map((c) => clamp(c).toString(16).padStart(2, "0")).join("");
}

/** Empty list means the spec is valid and safe to send. */
export function specIssues(spec: ChromaKeySpec): string[] {
  const issues: string[] = [];
  if (!parseHexColour(spec.keyHex)) issues.push(`key colour is not #rrggbb: ${spec.keyHex}`);
  if (!Number.isFinite(spec.tola) || spec.tola < 0) issues.push("tola must be >= 0");
  if (!Number.isFinite(spec.tolb)) issues.push("tolb must be a number");
  if (Number.isFinite(spec.tola) && Number.isFinite(spec.tolb) && !(spec.tola < spec.tolb)) {
    issues.push(`need tola < tolb (got ${spec.tola} >= ${spec.tolb})`);
  }
  return issues;
}

export function specsEqual(a: ChromaKeySpec, b: ChromaKeySpec): boolean {
  return a.keyHex.toLowerCase() === b.keyHex.toLowerCase() && a.tola === b.tola && a.tolb === b.tolb;
}

export function toWire(spec: ChromaKeySpec): WireSpec {
  const rgb = parseHexColour(spec.keyHex);
  if (!rgb) throw new Error(`invalid key colour: ${spec.keyHex}`);
  return { key_hex: formatHexColour(rgb), tola: spec.tola, tolb: spec.tolb };
}

export function fromWire(wire: WireSpec): ChromaKeySpec {
  return { keyHex: wire.key_hex, tola: wire.tola, tolb: wire.tolb };
}
