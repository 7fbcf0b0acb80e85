"""Raster types, BT.601 colour conversion, and lossless frame I/O.

A frame is a ``(height, width, 3)`` uint8 numpy array of row-major RGB
samples.  A matte is a ``(height, width)`` float32 array of foreground
opacity in [0, 1] (1 = keep foreground, 0 = replace background).
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError

# aliases for readability in signatures; invariants live in the validators
Frame = np.ndarray
Matte = np.ndarray

# full-range BT.601: Y = .299r + .587g + .114b,
# Cb = 128 - .168736r - .331264g + .5b, Cr = 128 + .5r - .418688g - .081312b.
# The chroma rows are evaluated in difference form (algebraically identical,
# since .168736 - .5 = -.331264 and .081312 - .5 = -.418688) so any grey
# pixel lands on Cb = Cr = 128 exactly rather than within 1 ulp.
_KR, _KG, _KB = 0.299, 0.587, 0.114
_CB_HALF, _CB_GR = 0.5, 0.168736
_CR_HALF, _CR_GB = 0.5, 0.081312


class YCbCrPixel(NamedTuple):
    y: float
    cb: float
    cr: float


def rgb_to_ycbcr(r: float, g: float, b: float) -> YCbCrPixel:
    """Full-range BT.601 conversion of one pixel, clamped to [0, 255]."""
    y = _KR * r + _KG * g + _KB * b
    cb = 128.0 + _CB_HALF * (b - g) + _CB_GR * (g - r)
    cr = 128.0 + _CR_HALF * (r - g) + _CR_GB * (g - b)
    clamp = lambda v: min(255.0, max(0.0, v))
    return YCbCrPixel(clamp(y), clamp(cb), clamp(cr))


def chroma_planes(frame: Frame) -> tuple[np.ndarray, np.ndarray]:
    """(Cb, Cr) planes as float64 arrays, clamped to [0, 255]."""
    r = frame[..., 0].astype(np.float64)
    g = frame[..., 1].astype(np.float64)
    b = frame[..., 2].astype(np.float64)
    cb = 128.0 + _CB_HALF * (b - g) + _CB_GR * (g - r)
    cr = 128.0 + _CR_HALF * (r - g) + _CR_GB * (g - b)
    np.clip(cb, 0.0, 255.0, out=cb)
    np.clip(cr, 0.0, 255.0, out=cr)
    return cb, cr


def luma(frame: Frame) -> np.ndarray:
    """Y plane as float64 in [0, 255]."""
    r = frame[..., 0].astype(np.float64)
    g = frame[..., 1].astype(np.float64)
    b = frame[..., 2].astype(np.float64)
    return _KR * r + _KG * g + _KB * b


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Round-half-up float values to uint8, clamping to [0, 255]."""
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def validate_frame(frame: Frame) -> None:
    if not isinstance(frame, np.ndarray) or frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"frame must be (H, W, 3), got {getattr(frame, 'shape', None)}")
    if frame.dtype != np.uint8:
        raise ValueError(f"frame must be uint8, got {frame.dtype}")
    if frame.shape[0] < 1 or frame.shape[1] < 1:
        raise ValueError("frame dimensions must be >= 1")


def validate_matte(matte: Matte) -> None:
    if not isinstance(matte, np.ndarray) or matte.ndim != 2:
        raise ValueError(f"matte must be (H, W), got {getattr(matte, 'shape', None)}")
    if matte.size and (float(matte.min()) < 0.0 or float(matte.max()) > 1.0):
        raise ValueError("matte values must lie in [0, 1]")


def frame_dims(frame: Frame) -> tuple[int, int]:
    """(width, height) of a frame or matte."""
    return frame.shape[1], frame.shape[0]


def new_frame(width: int, height: int, fill: tuple[int, int, int] = (0, 0, 0)) -> Frame:
    out = np.empty((height, width, 3), dtype=np.uint8)
    out[:] = fill
    return out


def _to_rgb_over_black(img: Image.Image) -> Image.Image:
    # ingest alpha by compositing over black so mixed datasets load cleanly
    if img.mode in ("RGBA", "LA", "PA") or (img.mode == "P" and "transparency" in img.info):
        rgba = img.convert("RGBA")
        black = Image.new("RGBA", rgba.size, (0, 0, 0, 255))
        return Image.alpha_composite(black, rgba).convert("RGB")
    return img.convert("RGB")


def load_frame(path: str | Path) -> Frame:
    """Decode a PNG or JPEG file to an RGB frame.

    Raises FileNotFoundError for a missing path and DecodeError for a
    corrupt or unsupported file.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    try:
        with Image.open(path) as img:
            img = _to_rgb_over_black(img)
            return np.array(img, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc


def decode_frame(data: bytes) -> Frame:
    """Decode in-memory PNG/JPEG bytes to an RGB frame."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            img = _to_rgb_over_black(img)
            return np.array(img, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"in-memory image: {exc}") from exc


# zlib level 1 halves encode time at batch scale with no size penalty on
# camera-noise content; PNG stays lossless at every level
PNG_COMPRESS_LEVEL = 1


def encode_png(frame: Frame) -> bytes:
    validate_frame(frame)
    buf = io.BytesIO()
    Image.fromarray(frame, mode="RGB").save(buf, format="PNG", compress_level=PNG_COMPRESS_LEVEL)
    return buf.getvalue()


def encode_gray_png(gray: np.ndarray) -> bytes:
    """Encode a (H, W) uint8 array as a single-channel PNG."""
    if gray.dtype != np.uint8 or gray.ndim != 2:
        raise ValueError("expected (H, W) uint8")
    buf = io.BytesIO()
    Image.fromarray(gray, mode="L").save(buf, format="PNG", compress_level=PNG_COMPRESS_LEVEL)
    return buf.getvalue()


def decode_gray(data: bytes) -> np.ndarray:
    """Decode PNG bytes to a (H, W) uint8 grayscale array."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            return np.array(img.convert("L"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"in-memory mask: {exc}") from exc


def save_frame(frame: Frame, path: str | Path) -> None:
    """Write a frame as PNG; reloading reproduces the pixel data exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_png(frame))


def save_gray(gray: np.ndarray, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_gray_png(gray))


def read_dims(path: str | Path) -> tuple[int, int]:
    """(width, height) from the file header without decoding pixel data."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    try:
        with Image.open(path) as img:
            return img.size
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
