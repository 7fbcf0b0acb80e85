"""Photometric-distortion + random-shift baseline augmentation.

Two independently gated stages: a brightness/contrast/saturation/hue
distortion applied in that fixed order, then a zero-pad-and-crop shift.
Each stage fires with probability apply_prob, so with the default 0.5
both stages run together a quarter of the time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import imaging
from .imaging import Frame
from .seeding import Rng, derive_seed


@dataclass(frozen=True)
class CvAugParams:
    brightness_range: tuple[float, float] = (0.875, 1.125)
    contrast_range: tuple[float, float] = (0.5, 1.5)
    saturation_range: tuple[float, float] = (0.5, 1.5)
    hue_shift_range: tuple[float, float] = (-0.05, 0.05)
    shift_pad: int = 4
    apply_prob: float = 0.5

    def __post_init__(self):
        for name in ("brightness_range", "contrast_range", "saturation_range", "hue_shift_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: lo {lo} > hi {hi}")
        if not 0.0 <= self.apply_prob <= 1.0:
            raise ValueError(f"apply_prob must be in [0, 1], got {self.apply_prob}")
        if self.shift_pad < 0:
            raise ValueError(f"shift_pad must be >= 0, got {self.shift_pad}")


def _rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    # rgb float32 in [0, 1], shape (H, W, 3)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    v = maxc
    delta = maxc - minc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    safe = np.where(delta > 0, delta, 1.0)
    h = np.zeros_like(maxc)
    h = np.where(maxc == r, ((g - b) / safe) % 6.0, h)
    h = np.where(maxc == g, (b - r) / safe + 2.0, h)
    h = np.where(maxc == b, (r - g) / safe + 4.0, h)
    h = np.where(delta > 0, h / 6.0, 0.0)
    return np.stack([h, s, v], axis=-1)


def _hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6).astype(np.int32) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    choices_r = [v, q, p, p, t, v]
    choices_g = [t, v, v, q, p, p]
    choices_b = [p, p, t, v, v, q]
    r = np.choose(i, choices_r)
    g = np.choose(i, choices_g)
    b = np.choose(i, choices_b)
    return np.stack([r, g, b], axis=-1)


def _luma01(img: np.ndarray) -> np.ndarray:
    return 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]


def photometric_distort(frame: Frame, seed: int, params: CvAugParams) -> Frame:
    """Seed-derived brightness, contrast, saturation, hue; clamped per stage."""
    imaging.validate_frame(frame)
    fb = Rng(derive_seed(seed, "brightness")).uniform_in(*params.brightness_range)
    fc = Rng(derive_seed(seed, "contrast")).uniform_in(*params.contrast_range)
    fs = Rng(derive_seed(seed, "saturation")).uniform_in(*params.saturation_range)
    dh = Rng(derive_seed(seed, "hue")).uniform_in(*params.hue_shift_range)

    img = frame.astype(np.float32)
    img = np.clip(img * fb, 0.0, 255.0)
    grey_mean = float(_luma01(img).mean())
    img = np.clip(grey_mean + fc * (img - grey_mean), 0.0, 255.0)
    grey = _luma01(img)[..., None]
    img = np.clip(grey + fs * (img - grey), 0.0, 255.0)
    if dh != 0.0:
        hsv = _rgb_to_hsv(img / 255.0)
        hsv[..., 0] = (hsv[..., 0] + dh) % 1.0
        img = np.clip(_hsv_to_rgb(hsv) * 255.0, 0.0, 255.0)
    return imaging.quantize_u8(img)


def random_shift(frame: Frame, seed: int, pad: int) -> Frame:
    """Zero-pad by `pad` on all sides, crop back at a random offset."""
    imaging.validate_frame(frame)
    if pad < 0:
        raise ValueError("pad must be >= 0")
    if pad == 0:
        return frame.copy()
    h, w = frame.shape[:2]
    padded = np.zeros((h + 2 * pad, w + 2 * pad, 3), dtype=np.uint8)
    padded[pad : pad + h, pad : pad + w] = frame
    ox = Rng(derive_seed(seed, "shift-x")).randint(2 * pad + 1)
    oy = Rng(derive_seed(seed, "shift-y")).randint(2 * pad + 1)
    return np.ascontiguousarray(padded[oy : oy + h, ox : ox + w])


def stage_gates(seed: int, apply_prob: float) -> tuple[bool, bool]:
    """Independent Bernoulli gates for the two stages."""
    g1 = Rng(derive_seed(seed, "gate-photometric")).uniform() < apply_prob
    g2 = Rng(derive_seed(seed, "gate-shift")).uniform() < apply_prob
    return g1, g2


def cvaug(frame: Frame, seed: int, params: CvAugParams = CvAugParams()) -> Frame:
    """Full baseline: gated photometric distortion, then gated shift."""
    distort, shift = stage_gates(seed, params.apply_prob)
    out = frame
    if distort:
        out = photometric_distort(out, derive_seed(seed, "photometric"), params)
    if shift:
        out = random_shift(out, derive_seed(seed, "shift"), params.shift_pad)
    return out.copy() if out is frame else out
