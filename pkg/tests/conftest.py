"""Shared fixtures: synthetic green-screen datasets and frame builders."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from greenaug import imaging
from greenaug.keying import ChromaKeySpec

DEFAULT_KEY = ChromaKeySpec.from_hex("#439f82", 30, 35)
CAMERAS = ("left_shoulder", "upper_wrist", "lower_wrist")


def synthetic_green_frame(
    seed: int,
    dims: tuple[int, int] = (64, 48),
    key: tuple[int, int, int] = DEFAULT_KEY.key_colour,
) -> np.ndarray:
    """Key-coloured backdrop plus a per-seed foreground rectangle."""
    w, h = dims
    rng = np.random.default_rng(seed)
    img = np.empty((h, w, 3), dtype=np.float32)
    img[:] = np.array(key, dtype=np.float32)
    img += rng.normal(0.0, 3.0, size=img.shape).astype(np.float32)
    x0 = int(rng.integers(0, max(1, w // 2)))
    y0 = int(rng.integers(0, max(1, h // 2)))
    bw = max(2, w // 3)
    bh = max(2, h // 3)
    colour = rng.integers(0, 256, size=3)
    # keep the blob chroma far from green so mattes split cleanly
    colour[2] = 255
    colour[1] = 40
    img[y0 : y0 + bh, x0 : x0 + bw] = colour
    return imaging.quantize_u8(img)


def write_episode(
    root: Path,
    task: str,
    episode_id: str,
    frame_count: int,
    cameras: tuple[str, ...] = CAMERAS,
    dims: tuple[int, int] = (64, 48),
    chroma: ChromaKeySpec = DEFAULT_KEY,
    fps: float | None = 30.0,
    seed: int = 0,
) -> Path:
    ep_dir = root / "tasks" / task / "episodes" / episode_id
    ep_dir.mkdir(parents=True, exist_ok=True)
    for camera in cameras:
        for i in range(frame_count):
            frame = synthetic_green_frame(
                seed=hash((seed, task, episode_id, camera, i)) & 0xFFFF,
                dims=dims,
                key=chroma.key_colour,
            )
            imaging.save_frame(frame, ep_dir / camera / f"frame_{i:06d}.png")
    meta = {
        "episode_id": episode_id,
        "task": task,
        "cameras": list(cameras),
        "frame_count": frame_count,
        "chroma": chroma.to_json(),
    }
    if fps is not None:
        meta["fps"] = fps
    (ep_dir / "meta.json").write_text(json.dumps(meta, indent=2))
    return ep_dir


def build_dataset(
    root: Path,
    tasks: tuple[str, ...] = ("open_drawer", "stack_cups"),
    episodes_per_task: int = 2,
    frame_count: int = 3,
    cameras: tuple[str, ...] = CAMERAS,
    dims: tuple[int, int] = (64, 48),
) -> Path:
    for t, task in enumerate(tasks):
        for e in range(episodes_per_task):
            write_episode(
                root, task, f"ep{e:03d}", frame_count,
                cameras=cameras, dims=dims, seed=t * 100 + e,
            )
    return root


@pytest.fixture
def small_dataset(tmp_path: Path) -> Path:
    root = tmp_path / "dataset"
    build_dataset(root, tasks=("open_drawer", "stack_cups"), episodes_per_task=2,
                  frame_count=3, cameras=("left_shoulder", "upper_wrist"), dims=(48, 36))
    return root


def tree_digest(root: Path, include_report: bool = False) -> dict[str, str]:
    """Relative path -> content hash for byte-level tree comparison.

    report.json carries wall-clock timings, so it is excluded from
    determinism comparisons unless asked for.
    """
    import hashlib

    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and (include_report or p.name != "report.json"):
            out[p.relative_to(root).as_posix()] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].replace("test_", "", 1)
    outcome = "PASS" if report.passed else ("FAIL" if report.failed else "SKIP")
    print(f"\nACCEPTANCE {outcome}: {name}", flush=True)
