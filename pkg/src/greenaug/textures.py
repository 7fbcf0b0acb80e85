"""Background texture sources and the texture-randomness entropy metric.

Three source kinds: solid colours drawn from a palette (or fully random),
procedural Perlin/fBm noise mapped through a two-colour gradient, and a
file-backed library sampled by seed.  All sampling is a pure function of
(source, seed, dims).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import imaging
from .errors import DecodeError, EmptyLibrary, SpecInvalid
from .imaging import Frame
from .keying import format_hex_colour, parse_hex_colour
from .seeding import Rng, derive_seed

log = logging.getLogger(__name__)

_LIBRARY_SUFFIXES = {".png", ".jpg", ".jpeg"}

# 8 gradient directions of length sqrt(2); interpolated noise then stays
# within [-1, 1] per octave, which the fBm normalisation below relies on.
_SQRT2 = math.sqrt(2.0)
_GRAD_X = np.array([_SQRT2, -_SQRT2, 0.0, 0.0, 1.0, -1.0, 1.0, -1.0], dtype=np.float32)
_GRAD_Y = np.array([0.0, 0.0, _SQRT2, -_SQRT2, 1.0, 1.0, -1.0, -1.0], dtype=np.float32)


@dataclass(frozen=True)
class PerlinParams:
    """fBm gradient-noise parameters.

    base_cells counts gradient-grid cells across the shorter frame
    dimension; persistence is the per-octave amplitude decay.
    """

    octaves: int = 4
    base_cells: int = 4
    persistence: float = 0.5
    colour_mode: str = "two-colour"

    def __post_init__(self):
        if self.octaves < 1:
            raise SpecInvalid(f"octaves must be >= 1, got {self.octaves}")
        if self.base_cells < 1:
            raise SpecInvalid(f"base_cells must be >= 1, got {self.base_cells}")
        if not 0.0 < self.persistence <= 1.0:
            raise SpecInvalid(f"persistence must be in (0, 1], got {self.persistence}")
        if self.colour_mode != "two-colour":
            raise SpecInvalid(f"unknown colour mode: {self.colour_mode!r}")


@dataclass(frozen=True)
class TextureSource:
    """One of: Solid, Perlin, Library.  Build via the factory methods."""

    kind: str
    solid_palette: Optional[tuple[tuple[int, int, int], ...]] = None
    perlin_params: Optional[PerlinParams] = None
    library_dir: Optional[Path] = None
    files: Optional[tuple[Path, ...]] = field(default=None, repr=False)

    @classmethod
    def solid(cls, palette: Sequence[tuple[int, int, int]] = ()) -> "TextureSource":
        """Solid colours; an empty palette means seed-derived random RGB."""
        return cls(kind="solid", solid_palette=tuple(tuple(c) for c in palette))

    @classmethod
    def perlin(cls, params: PerlinParams = PerlinParams()) -> "TextureSource":
        return cls(kind="perlin", perlin_params=params)

    @classmethod
    def library(cls, directory: str | Path) -> "TextureSource":
        """Index a flat or nested directory of PNG/JPEG files.

        Files are ordered by lexicographic relative path so seed-to-texture
        mapping is stable across machines.
        """
        directory = Path(directory)
        if not directory.is_dir():
            raise EmptyLibrary(f"not a directory: {directory}")
        found = [
            p for p in directory.rglob("*")
            if p.is_file() and p.suffix.lower() in _LIBRARY_SUFFIXES
        ]
        found.sort(key=lambda p: p.relative_to(directory).as_posix())
        if not found:
            raise EmptyLibrary(f"no PNG/JPEG files under {directory}")
        return cls(kind="library", library_dir=directory, files=tuple(found))

    @property
    def size(self) -> Optional[int]:
        """Distinct textures available; None means unbounded (seed-indexed)."""
        if self.kind == "solid":
            return len(self.solid_palette) if self.solid_palette else None
        if self.kind == "library":
            return len(self.files)
        return None

    def to_json(self) -> dict:
        if self.kind == "solid":
            return {"kind": "solid", "palette": [format_hex_colour(c) for c in self.solid_palette]}
        if self.kind == "perlin":
            p = self.perlin_params
            return {
                "kind": "perlin",
                "octaves": p.octaves,
                "base_cells": p.base_cells,
                "persistence": p.persistence,
                "colour_mode": p.colour_mode,
            }
        return {"kind": "library", "dir": str(self.library_dir)}

    @classmethod
    def from_json(cls, data: dict) -> "TextureSource":
        kind = data.get("kind")
        if kind == "solid":
            return cls.solid([parse_hex_colour(c) for c in data.get("palette", [])])
        if kind == "perlin":
            return cls.perlin(PerlinParams(
                octaves=int(data.get("octaves", 4)),
                base_cells=int(data.get("base_cells", 4)),
                persistence=float(data.get("persistence", 0.5)),
                colour_mode=data.get("colour_mode", "two-colour"),
            ))
        if kind == "library":
            return cls.library(data["dir"])
        raise SpecInvalid(f"unknown texture kind: {kind!r}")


def parse_texture_arg(text: str) -> TextureSource:
    """CLI texture argument: 'perlin', 'solid[:#rrggbb,...]', or a directory."""
    if text == "perlin":
        return TextureSource.perlin()
    if text == "solid":
        return TextureSource.solid()
    if text.startswith("solid:"):
        colours = [parse_hex_colour(c) for c in text[len("solid:"):].split(",") if c]
        return TextureSource.solid(colours)
    return TextureSource.library(text)


def _fade(t: np.ndarray) -> np.ndarray:
    # quintic fade: 6t^5 - 15t^4 + 10t^3
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def _gradient_noise(u: np.ndarray, v: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Classic 2D gradient noise on a separable pixel grid.

    u is the (w,) row of lattice x-coordinates, v the (h,) column of
    lattice y-coordinates (both >= 0); the noise is exactly 0 at integer
    lattice points.  Corner hashes and gradients are built on the small
    cell grid and expanded to pixels, which keeps the per-frame cost down.
    """
    iu = np.floor(u)
    iv = np.floor(v)
    fu = (u - iu).astype(np.float32)[None, :]
    fv = (v - iv).astype(np.float32)[:, None]
    cx = iu.astype(np.int64)
    cy = iv.astype(np.int64)
    ncx = int(cx[-1]) + 1
    ncy = int(cy[-1]) + 1
    # hash every cell corner once: corner (i, j) of cell (i, j) is grid[j, i]
    gi = np.arange(ncx + 1, dtype=np.int64)
    gj = np.arange(ncy + 1, dtype=np.int64)
    grid = perm[(perm[gi & 255][None, :] + gj[:, None]) & 255] & 7
    # pixel runs per cell are contiguous, so repeat beats a fancy gather
    cntx = np.bincount(cx, minlength=ncx)
    cnty = np.bincount(cy, minlength=ncy)

    def corner(dy: int, dx: int) -> tuple[np.ndarray, np.ndarray]:
        sub = grid[dy : dy + ncy, dx : dx + ncx]
        gx = np.repeat(np.repeat(_GRAD_X[sub], cnty, axis=0), cntx, axis=1)
        gy = np.repeat(np.repeat(_GRAD_Y[sub], cnty, axis=0), cntx, axis=1)
        return gx, gy

    fu1 = fu - 1.0
    fv1 = fv - 1.0
    gx, gy = corner(0, 0)
    d00 = gx * fu
    d00 += gy * fv
    gx, gy = corner(0, 1)
    d10 = gx * fu1
    d10 += gy * fv
    gx, gy = corner(1, 0)
    d01 = gx * fu
    d01 += gy * fv1
    gx, gy = corner(1, 1)
    d11 = gx * fu1
    d11 += gy * fv1
    su = _fade(fu)
    sv = _fade(fv)
    d10 -= d00
    d10 *= su
    d10 += d00  # nx0
    d11 -= d01
    d11 *= su
    d11 += d01  # nx1
    d11 -= d10
    d11 *= sv
    d11 += d10
    return d11


def perlin_field(params: PerlinParams, seed: int, dims: tuple[int, int]) -> np.ndarray:
    """fBm scalar field in [0, 1], (height, width).

    Normalised by the analytic amplitude bound sum(persistence^i), so the
    raw zero at lattice points maps to exactly 0.5.
    """
    w, h = dims
    if w < 1 or h < 1:
        raise SpecInvalid(f"bad dims: {dims}")
    perm = np.asarray(Rng(derive_seed(seed, "perlin-perm")).permutation(256), dtype=np.int64)
    cell = min(w, h) / params.base_cells
    u = np.arange(w, dtype=np.float64) / cell
    v = np.arange(h, dtype=np.float64) / cell
    total = np.zeros((h, w), dtype=np.float32)
    amplitude = 1.0
    frequency = 1.0
    norm = 0.0
    for _ in range(params.octaves):
        total += np.float32(amplitude) * _gradient_noise(u * frequency, v * frequency, perm)
        norm += amplitude
        amplitude *= params.persistence
        frequency *= 2.0
    out = np.float64(0.5) + np.float64(0.5 / norm) * total.astype(np.float64)
    return np.clip(out, 0.0, 1.0)


def _seed_colour(seed: int, tag: str) -> np.ndarray:
    return np.array(Rng(derive_seed(seed, tag)).rgb(), dtype=np.float64)


def _sample_solid(source: TextureSource, seed: int, dims: tuple[int, int]) -> Frame:
    w, h = dims
    if source.solid_palette:
        colour = source.solid_palette[seed % len(source.solid_palette)]
    else:
        colour = tuple(int(c) for c in _seed_colour(seed, "solid-colour"))
    return imaging.new_frame(w, h, colour)


def _sample_perlin(source: TextureSource, seed: int, dims: tuple[int, int]) -> Frame:
    fld = perlin_field(source.perlin_params, seed, dims)
    c0 = _seed_colour(seed, "perlin-colour-0")
    c1 = _seed_colour(seed, "perlin-colour-1")
    rgb = c0[None, None, :] + fld[:, :, None] * (c1 - c0)[None, None, :]
    return imaging.quantize_u8(rgb)


def _aspect_fill(img: Frame, dims: tuple[int, int]) -> Frame:
    """Scale to cover dims (no stretching) then centre-crop."""
    from PIL import Image

    tw, th = dims
    ih, iw = img.shape[:2]
    scale = max(tw / iw, th / ih)
    rw = max(tw, math.ceil(iw * scale - 1e-9))
    rh = max(th, math.ceil(ih * scale - 1e-9))
    if (rw, rh) != (iw, ih):
        img = np.array(
            Image.fromarray(img, mode="RGB").resize((rw, rh), Image.BILINEAR),
            dtype=np.uint8,
        )
    x0 = (rw - tw) // 2
    y0 = (rh - th) // 2
    return np.ascontiguousarray(img[y0 : y0 + th, x0 : x0 + tw])


def _sample_library(source: TextureSource, seed: int, dims: tuple[int, int]) -> Frame:
    files = source.files
    start = seed % len(files)
    for step in range(len(files)):
        path = files[(start + step) % len(files)]
        try:
            return _aspect_fill(imaging.load_frame(path), dims)
        except DecodeError as exc:
            log.warning("skipping undecodable texture %s (%s)", path, exc)
    raise DecodeError(f"no decodable texture in {source.library_dir}")


def sample_texture(source: TextureSource, seed: int, dims: tuple[int, int]) -> Frame:
    """Deterministic texture frame for (source, seed, dims)."""
    if source.kind == "solid":
        return _sample_solid(source, seed, dims)
    if source.kind == "perlin":
        return _sample_perlin(source, seed, dims)
    if source.kind == "library":
        return _sample_library(source, seed, dims)
    raise SpecInvalid(f"unknown texture kind: {source.kind!r}")


def luma_histogram_entropy(frame: Frame) -> float:
    """Shannon entropy (bits) of the 256-bin luma histogram."""
    levels = np.clip(np.floor(imaging.luma(frame) + 0.5), 0, 255).astype(np.int64)
    counts = np.bincount(levels.ravel(), minlength=256)
    probs = counts[counts > 0] / levels.size
    return float(-(probs * np.log2(probs)).sum())


def dataset_entropy(
    source: TextureSource,
    n_samples: int,
    dims: tuple[int, int],
    seed: int,
) -> float:
    """Mean luma-histogram entropy over n_samples sampled textures."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    total = 0.0
    for i in range(n_samples):
        tex = sample_texture(source, derive_seed(seed, "entropy-sample", i), dims)
        total += luma_histogram_entropy(tex)
    return total / n_samples
