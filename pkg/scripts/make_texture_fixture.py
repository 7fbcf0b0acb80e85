#!/usr/bin/env python3
"""Generate the bundled natural-texture fixture (tests/fixtures/textures).

50 colourful multi-scale noise textures with histogram-equalised luma, so
the library's measured texture randomness sits near the top of the scale
the way a photographic texture library does.  Committed output; rerun only
if the recipe changes.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from greenaug import imaging  # noqa: E402
from greenaug.textures import PerlinParams, perlin_field  # noqa: E402

OUT_DIR = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "textures"
COUNT = 50
DIMS = (192, 144)


def equalise(field: np.ndarray) -> np.ndarray:
    """Exact rank-based histogram equalisation to uniform [0, 1]."""
    flat = field.ravel()
    ranks = np.empty_like(flat)
    ranks[np.argsort(flat, kind="stable")] = np.arange(flat.size)
    return (ranks / (flat.size - 1)).reshape(field.shape)


def make_texture(i: int) -> np.ndarray:
    rng = np.random.default_rng(1000 + i)
    params = PerlinParams(
        octaves=int(rng.integers(4, 7)),
        base_cells=int(rng.integers(2, 7)),
        persistence=float(rng.uniform(0.45, 0.7)),
    )
    base = perlin_field(params, seed=31_000 + i, dims=DIMS)
    grain = rng.random(base.shape)
    mixed = (1.0 - 0.25) * base + 0.25 * grain
    luma = equalise(mixed) * 255.0

    # slow-varying chroma around neutral; luma carries the equalised signal
    cb = 128.0 + 70.0 * (perlin_field(PerlinParams(octaves=2, base_cells=2), 62_000 + i, DIMS) - 0.5)
    cr = 128.0 + 70.0 * (perlin_field(PerlinParams(octaves=2, base_cells=3), 93_000 + i, DIMS) - 0.5)

    r = luma + 1.402 * (cr - 128.0)
    g = luma - 0.344136 * (cb - 128.0) - 0.714136 * (cr - 128.0)
    b = luma + 1.772 * (cb - 128.0)
    return imaging.quantize_u8(np.stack([r, g, b], axis=-1))


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for i in range(COUNT):
        imaging.save_frame(make_texture(i), OUT_DIR / f"texture_{i:03d}.png")
    print(f"wrote {COUNT} textures to {OUT_DIR}")


if __name__ == "__main__":
    main()
