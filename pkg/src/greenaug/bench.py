"""Per-frame timing harness for the offline augmentation transforms.

The rand variant applies a fixed set of pre-existing textures, so the set
is built before the clock starts and each timed iteration covers what the
batch pipeline does per frame: compute the matte, pick a texture, and
composite.  Disk I/O is excluded.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import baseline, compositing, imaging, keying, textures
from .imaging import Frame
from .keying import ChromaKeySpec
from .seeding import derive_seed
from .textures import TextureSource

BENCH_KEY = ChromaKeySpec.from_hex("#439f82", 30, 35)

DEFAULT_SET_SIZE = 64


@dataclass
class BenchResult:
    mode: str
    frames: int
    dims: tuple[int, int]
    mean_ms: float
    min_ms: float
    max_ms: float


def synthetic_frame(dims: tuple[int, int], seed: int = 1) -> Frame:
    """Key-coloured backdrop with sensor-ish noise and a foreground blob."""
    w, h = dims
    rng = np.random.default_rng(seed)
    base = np.array(BENCH_KEY.key_colour, dtype=np.float32)
    img = base[None, None, :] + rng.normal(0.0, 4.0, size=(h, w, 3)).astype(np.float32)
    # centred foreground rectangle, clearly off-key
    y0, y1 = h // 4, h - h // 4
    x0, x1 = w // 4, w - w // 4
    gx = np.linspace(40, 215, x1 - x0, dtype=np.float32)
    img[y0:y1, x0:x1, 0] = gx[None, :]
    img[y0:y1, x0:x1, 1] = 90.0
    img[y0:y1, x0:x1, 2] = 255.0 - gx[None, :]
    return imaging.quantize_u8(img)


def build_texture_set(
    source: TextureSource, size: int, dims: tuple[int, int], seed: int
) -> list[Frame]:
    return [
        textures.sample_texture(source, derive_seed(seed, "bench-texture", i), dims)
        for i in range(size)
    ]


def run_bench(
    mode: str = "rand",
    frames: int = 1000,
    dims: tuple[int, int] = (320, 240),
    texture: TextureSource | None = None,
    seed: int = 1,
    set_size: int = DEFAULT_SET_SIZE,
    warmup: int = 5,
) -> BenchResult:
    if mode not in ("rand", "blackout", "cvaug"):
        raise ValueError(f"bench supports rand|blackout|cvaug, got {mode!r}")
    if frames < 1:
        raise ValueError("frames must be >= 1")
    frame = synthetic_frame(dims)
    texture_set = None
    if mode == "rand":
        texture_set = build_texture_set(texture or TextureSource.perlin(), set_size, dims, seed)

    def transform(step_seed: int) -> Frame:
        if mode == "cvaug":
            return baseline.cvaug(frame, step_seed)
        matte = keying.compute_matte(frame, BENCH_KEY)
        if mode == "blackout":
            return compositing.blackout(frame, matte)
        background = texture_set[step_seed % len(texture_set)]
        return compositing.composite(frame, matte, background)

    for i in range(warmup):
        transform(derive_seed(seed, "warmup", i))
    times = []
    for i in range(frames):
        t0 = time.perf_counter()
        transform(derive_seed(seed, "bench", i))
        times.append((time.perf_counter() - t0) * 1000.0)
    return BenchResult(
        mode=mode,
        frames=frames,
        dims=dims,
        mean_ms=sum(times) / len(times),
        min_ms=min(times),
        max_ms=max(times),
    )
