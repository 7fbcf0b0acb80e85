"""Soft chroma keying: frames to foreground-opacity mattes.

The key is evaluated in the (Cb, Cr) plane only, so shading variation on
the screen (a luma effect) does not break the matte.  Alpha per pixel:

    d < tola          -> 0          (keyed, background)
    tola <= d < tolb  -> (d - tola) / (tolb - tola)
    d >= tolb         -> 1          (opaque foreground)

where d is the Euclidean chroma distance between the pixel and the key
colour on the 0-255 scale.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import imaging
from .errors import DimensionMismatch, OutOfBounds, SpecInvalid
from .imaging import Frame, Matte

_HEX_RE = re.compile(r"^#?([0-9a-fA-F]{6})$")


def parse_hex_colour(text: str) -> tuple[int, int, int]:
    m = _HEX_RE.match(text.strip())
    if not m:
        raise SpecInvalid(f"not a #rrggbb colour: {text!r}")
    v = int(m.group(1), 16)
    return ((v >> 16) & 0xFF, (v >> 8) & 0xFF, v & 0xFF)


def format_hex_colour(rgb: Sequence[int]) -> str:
    r, g, b = rgb
    return f"#{r:02x}{g:02x}{b:02x}"


@dataclass(frozen=True)
class ChromaKeySpec:
    """Key colour plus inner/outer chroma-distance tolerances."""

    key_colour: tuple[int, int, int]
    tola: float
    tolb: float

    def __post_init__(self):
        r, g, b = self.key_colour
        for c in (r, g, b):
            if not 0 <= c <= 255:
                raise SpecInvalid(f"key colour channel out of range: {self.key_colour}")
        if not 0 <= self.tola:
            raise SpecInvalid(f"tola must be >= 0, got {self.tola}")
        if not self.tola < self.tolb:
            raise SpecInvalid(f"need tola < tolb, got tola={self.tola} tolb={self.tolb}")

    @classmethod
    def from_hex(cls, key_hex: str, tola: float, tolb: float) -> "ChromaKeySpec":
        return cls(parse_hex_colour(key_hex), float(tola), float(tolb))

    @property
    def key_hex(self) -> str:
        return format_hex_colour(self.key_colour)

    def to_json(self) -> dict:
        return {"key_hex": self.key_hex, "tola": self.tola, "tolb": self.tolb}

    @classmethod
    def from_json(cls, data: dict) -> "ChromaKeySpec":
        try:
            return cls.from_hex(data["key_hex"], data["tola"], data["tolb"])
        except (KeyError, TypeError) as exc:
            raise SpecInvalid(f"bad chroma spec block: {data!r}") from exc


class MatteStats(NamedTuple):
    keyed_fraction: float
    mean_alpha: float


def compute_matte(frame: Frame, spec: ChromaKeySpec) -> Matte:
    """Soft foreground matte of a frame under a chroma key spec."""
    imaging.validate_frame(frame)
    cb, cr = imaging.chroma_planes(frame)
    _, kcb, kcr = imaging.rgb_to_ycbcr(*spec.key_colour)
    dist = np.hypot(cb - kcb, cr - kcr)
    alpha = (dist - spec.tola) / (spec.tolb - spec.tola)
    np.clip(alpha, 0.0, 1.0, out=alpha)
    return alpha.astype(np.float32)


def combine_mattes(mattes: Sequence[Matte]) -> Matte:
    """Per-pixel minimum: a pixel keyed by any spec is background."""
    if not mattes:
        raise ValueError("need at least one matte")
    first = mattes[0]
    for m in mattes[1:]:
        if m.shape != first.shape:
            raise DimensionMismatch(f"matte shapes differ: {first.shape} vs {m.shape}")
    out = first.astype(np.float32, copy=True)
    for m in mattes[1:]:
        np.minimum(out, m, out=out)
    return out


def pick_key_colour(frame: Frame, rect: tuple[int, int, int, int]) -> tuple[int, int, int]:
    """Channel-wise mean colour over a (x, y, width, height) rectangle."""
    imaging.validate_frame(frame)
    x, y, w, h = rect
    fh, fw = frame.shape[:2]
    if w < 1 or h < 1:
        raise OutOfBounds(f"empty rectangle: {rect}")
    if x < 0 or y < 0 or x + w > fw or y + h > fh:
        raise OutOfBounds(f"rect {rect} exceeds {fw}x{fh} frame")
    region = frame[y : y + h, x : x + w].astype(np.float64)
    mean = region.reshape(-1, 3).mean(axis=0)
    r, g, b = (int(np.floor(c + 0.5)) for c in mean)
    return (r, g, b)


def matte_stats(matte: Matte) -> MatteStats:
    imaging.validate_matte(matte)
    keyed = float(np.count_nonzero(matte < 0.5)) / matte.size
    return MatteStats(keyed_fraction=keyed, mean_alpha=float(matte.mean()))


def matte_to_gray(matte: Matte) -> np.ndarray:
    """Render a matte as an 8-bit grayscale image (alpha x 255)."""
    return imaging.quantize_u8(matte * 255.0)


def gray_to_matte(gray: np.ndarray) -> Matte:
    return (gray.astype(np.float32) / 255.0).astype(np.float32)
