"""Matte-driven compositing and per-episode coverage planning."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import imaging
from .errors import DimensionMismatch
from .imaging import Frame, Matte
from .seeding import Rng


@dataclass(frozen=True)
class CoveragePlan:
    """Which frame indices of an episode receive augmentation."""

    episode_length: int
    coverage_pct: float
    selected: frozenset[int]

    def __contains__(self, index: int) -> bool:
        return index in self.selected


def coverage_count(episode_length: int, coverage_pct: float) -> int:
    """round-half-up(pct/100 * length); makes 50% of odd lengths deterministic."""
    return int(math.floor(coverage_pct * episode_length / 100.0 + 0.5))


def plan_coverage(episode_length: int, coverage_pct: float, seed: int) -> CoveragePlan:
    """Seed-derived uniform subset of frame indices, without replacement."""
    if episode_length < 0:
        raise ValueError("episode_length must be >= 0")
    if not 0.0 <= coverage_pct <= 100.0:
        raise ValueError(f"coverage_pct must be in [0, 100], got {coverage_pct}")
    k = coverage_count(episode_length, coverage_pct)
    selected = frozenset(Rng(seed).subset(episode_length, k))
    return CoveragePlan(episode_length, coverage_pct, selected)


def _check_dims(*arrays) -> None:
    shapes = [a.shape[:2] for a in arrays]
    if any(s != shapes[0] for s in shapes[1:]):
        raise DimensionMismatch(f"dimensions differ: {shapes}")


def composite(frame: Frame, matte: Matte, background: Frame) -> Frame:
    """Per pixel out = a*fg + (1-a)*bg, rounded to 8 bit at the end.

    Pixels with a = 1 come out bit-identical to the source frame.
    """
    imaging.validate_frame(frame)
    imaging.validate_frame(background)
    imaging.validate_matte(matte)
    _check_dims(frame, matte, background)
    a = matte.astype(np.float32)[:, :, None]
    blend = a * frame.astype(np.float32) + (1.0 - a) * background.astype(np.float32)
    out = imaging.quantize_u8(blend)
    # exactness guard: float blending must never perturb opaque pixels
    opaque = matte >= 1.0
    out[opaque] = frame[opaque]
    return out


def blackout(frame: Frame, matte: Matte) -> Frame:
    """composite over an all-black background."""
    imaging.validate_frame(frame)
    black = np.zeros_like(frame)
    return composite(frame, matte, black)
