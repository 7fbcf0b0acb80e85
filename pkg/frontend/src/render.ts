/** Pixel helpers for the matte inspection views. */

/** Matte-as-red overlay on the original frame (film-industry convention):
 * keyed pixels glow red, opaque pixels show through untouched.
 * Both inputs are RGBA canvas buffers; the matte arrives as a grayscale
 * image so its red channel carries the alpha value. */
export function redOverlay(
  frame: Uint8ClampedArray,
  matte: Uint8ClampedArray,
  width: number,
  height: number,
): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    const o = i * 4;
    const a = matte[o] / 255; // grayscale: r = alpha
    out[o] = Math.round(frame[o] * a + 255 * (1 - a));
    out[o + 1] = Math.round(frame[o + 1] * a);
    out[o + 2] = Math.round(frame[o + 2] * a);
    out[o + 3] = 255;
  }
  return out;
}
