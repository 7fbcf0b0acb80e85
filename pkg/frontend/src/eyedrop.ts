/** Client-side eyedropper: mean colour of a small window around a click. */

import { formatHexColour } from "./spec.js";

export interface PixelSource {
  width: number;
  height: number;
  /** RGBA bytes, row-major (canvas ImageData layout). */
  data: Uint8ClampedArray | Uint8Array;
}

/** Channel-wise mean over a size x size window centred on (x, y), clipped
 * to the frame; null when the click is outside the frame entirely. */
export function pickColour(src: PixelSource, x: number, y: number, size = 3): string | null {
  const cx = Math.floor(x);
  const cy = Math.floor(y);
  if (cx < 0 || cy < 0 || cx >= src.width || cy >= src.height) return null;
  const half = Math.floor(size / 2);
  const x0 = Math.max(0, cx - half);
  const y0 = Math.max(0, cy - half);
  const x1 = Math.min(src.width - 1, cx + half);
  const y1 = Math.min(src.height - 1, cy + half);
  let r = 0;
  let g = 0;
  let b = 0;
  let n = 0;
  for (let yy = y0; yy <= y1; yy++) {
    for (let xx = x0; xx <= x1; xx++) {
      const o = (yy * src.width + xx) * 4;
      r += src.data[o];
      g += src.data[o + 1];
      b += src.data[o + 2];
      n += 1;
    }
  }
  return formatHexColour([r / n, g / n, b / n]);
}
