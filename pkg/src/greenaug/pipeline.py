"""Dataset scanning, deterministic batch augmentation, and verification.

On-disk layout:

    <root>/tasks/<task>/episodes/<episode_id>/meta.json
    <root>/tasks/<task>/episodes/<episode_id>/<camera>/frame_%06d.png (or .jpg)

Jobs mirror that layout under an output root, never drop frames, and are
a pure function of (input bytes, JobConfig): per-frame seeds are derived
from (global_seed, task, episode, camera, index), so results do not
depend on worker count or completion order.
"""

from __future__ import annotations

import json
import logging
import os
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import baseline, compositing, imaging, keying, textures
from .errors import JobConfigError
from .imaging import Frame
from .inpaint import EndpointConfig, InpaintClient, choose_prompt
from .keying import ChromaKeySpec
from .seeding import derive_seed
from .textures import TextureSource

log = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"

# fixed, documented default so unseeded runs stay reproducible
DEFAULT_GLOBAL_SEED = 123456789

MODES = ("rand", "gen", "blackout", "cvaug", "mask_export")

# the five-room prompt rotation used when no prompts are configured
DEFAULT_PROMPTS = (
    "photorealistic kitchen",
    "photorealistic study room",
    "photorealistic washing room",
    "photorealistic living room",
    "photorealistic bedroom",
)

_FRAME_EXTS = (".png", ".jpg")


def frame_seed(global_seed: int, task: str, episode_id: str, camera: str, index: int) -> int:
    """The per-frame seed every augmentation draw flows from."""
    return derive_seed(global_seed, task, episode_id, camera, index)


def frame_file(camera_dir: Path, index: int) -> Optional[Path]:
    for ext in _FRAME_EXTS:
        p = camera_dir / f"frame_{index:06d}{ext}"
        if p.exists():
            return p
    return None


@dataclass
class EpisodeManifest:
    episode_id: str
    task: str
    cameras: tuple[str, ...]
    frame_count: int
    chroma: ChromaKeySpec
    fps: Optional[float] = None
    provenance: Optional[dict] = None

    @classmethod
    def from_json(cls, data: dict) -> "EpisodeManifest":
        try:
            cameras = tuple(str(c) for c in data["cameras"])
            frame_count = int(data["frame_count"])
            if frame_count < 0:
                raise ValueError("frame_count must be >= 0")
            if not cameras:
                raise ValueError("cameras list is empty")
            return cls(
                episode_id=str(data["episode_id"]),
                task=str(data["task"]),
                cameras=cameras,
                frame_count=frame_count,
                chroma=ChromaKeySpec.from_json(data["chroma"]),
                fps=float(data["fps"]) if data.get("fps") is not None else None,
                provenance=data.get("provenance"),
            )
        except KeyError as exc:
            raise ValueError(f"manifest missing field {exc}") from exc

    def to_json(self) -> dict:
        out = {
            "episode_id": self.episode_id,
            "task": self.task,
            "cameras": list(self.cameras),
            "frame_count": self.frame_count,
            "chroma": self.chroma.to_json(),
        }
        if self.fps is not None:
            out["fps"] = self.fps
        if self.provenance is not None:
            out["provenance"] = self.provenance
        return out


@dataclass
class EpisodeRef:
    task: str
    episode_id: str
    manifest_path: Path
    manifest: EpisodeManifest

    @property
    def episode_dir(self) -> Path:
        return self.manifest_path.parent

    def frame_path(self, camera: str, index: int) -> Optional[Path]:
        return frame_file(self.episode_dir / camera, index)


@dataclass
class ScanIssue:
    kind: str  # manifest_missing | manifest_invalid | frame_gap
    path: str
    detail: str


@dataclass
class DatasetIndex:
    root: Path
    episodes: list[EpisodeRef]
    issues: list[ScanIssue]

    @property
    def tasks(self) -> list[str]:
        return sorted({ref.task for ref in self.episodes})

    @property
    def totals(self) -> dict:
        per_task: dict[str, dict[str, int]] = {}
        for ref in self.episodes:
            entry = per_task.setdefault(ref.task, {"episodes": 0, "frames": 0})
            entry["episodes"] += 1
            entry["frames"] += ref.manifest.frame_count * len(ref.manifest.cameras)
        return per_task

    def episodes_for(self, task: str) -> list[EpisodeRef]:
        return [ref for ref in self.episodes if ref.task == task]

    def find(self, task: str, episode_id: str) -> Optional[EpisodeRef]:
        for ref in self.episodes:
            if ref.task == task and ref.episode_id == episode_id:
                return ref
        return None


def scan_dataset(root: str | Path) -> DatasetIndex:
    """Walk tasks/<task>/episodes/<id>/, validating manifests and frames.

    Episodes that fail validation are excluded from the index and listed
    as issues, so a partial index is always usable.
    """
    root = Path(root)
    if not root.exists():
        raise FileNotFoundError(str(root))
    episodes: list[EpisodeRef] = []
    issues: list[ScanIssue] = []
    tasks_dir = root / "tasks"
    if not tasks_dir.is_dir():
        return DatasetIndex(root=root, episodes=episodes, issues=issues)
    for task_dir in sorted(p for p in tasks_dir.iterdir() if p.is_dir()):
        seen_ids: set[str] = set()
        episodes_dir = task_dir / "episodes"
        if not episodes_dir.is_dir():
            continue
        for ep_dir in sorted(p for p in episodes_dir.iterdir() if p.is_dir()):
            meta_path = ep_dir / "meta.json"
            if not meta_path.exists():
                issues.append(ScanIssue("manifest_missing", str(ep_dir), "no meta.json"))
                continue
            try:
                manifest = EpisodeManifest.from_json(json.loads(meta_path.read_text()))
            except (ValueError, OSError) as exc:
                issues.append(ScanIssue("manifest_invalid", str(meta_path), str(exc)))
                continue
            if manifest.episode_id in seen_ids:
                issues.append(ScanIssue(
                    "manifest_invalid", str(meta_path),
                    f"duplicate episode_id {manifest.episode_id!r}",
                ))
                continue
            gaps = _frame_gaps(ep_dir, manifest)
            if gaps:
                issues.extend(gaps)
                continue
            seen_ids.add(manifest.episode_id)
            episodes.append(EpisodeRef(
                task=manifest.task,
                episode_id=manifest.episode_id,
                manifest_path=meta_path,
                manifest=manifest,
            ))
    return DatasetIndex(root=root, episodes=episodes, issues=issues)


def _frame_gaps(ep_dir: Path, manifest: EpisodeManifest) -> list[ScanIssue]:
    issues = []
    for camera in manifest.cameras:
        cam_dir = ep_dir / camera
        for i in range(manifest.frame_count):
            if frame_file(cam_dir, i) is None:
                issues.append(ScanIssue(
                    "frame_gap", str(cam_dir),
                    f"missing frame index {i} (frame_{i:06d}.png/.jpg)",
                ))
        if frame_file(cam_dir, manifest.frame_count) is not None:
            issues.append(ScanIssue(
                "manifest_invalid", str(cam_dir),
                f"frames beyond declared frame_count {manifest.frame_count}",
            ))
    return issues


@dataclass
class JobConfig:
    mode: str
    output_root: Path
    texture: Optional[TextureSource] = None
    prompts: tuple[str, ...] = DEFAULT_PROMPTS
    coverage_pct: float = 100.0
    global_seed: int = DEFAULT_GLOBAL_SEED
    workers: int = 1
    endpoint: Optional[EndpointConfig] = None
    cvaug_params: baseline.CvAugParams = field(default_factory=baseline.CvAugParams)

    def __post_init__(self):
        self.output_root = Path(self.output_root)
        if self.mode not in MODES:
            raise JobConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.mode in ("rand", "mask_export") and self.texture is None:
            raise JobConfigError(f"mode {self.mode!r} requires a texture source")
        if self.mode == "gen":
            if self.endpoint is None:
                raise JobConfigError("mode 'gen' requires an endpoint")
            if not self.prompts:
                raise JobConfigError("mode 'gen' requires at least one prompt")
        if not 0.0 <= self.coverage_pct <= 100.0:
            raise JobConfigError(f"coverage_pct must be in [0, 100], got {self.coverage_pct}")
        if self.workers < 1:
            raise JobConfigError(f"workers must be >= 1, got {self.workers}")

    def provenance(self) -> dict:
        prov = {
            "mode": self.mode,
            "global_seed": self.global_seed,
            "coverage_pct": self.coverage_pct,
            "texture": self.texture.to_json() if self.texture else None,
            "prompts": list(self.prompts) if self.mode == "gen" else None,
            "tool_version": TOOL_VERSION,
        }
        if self.mode == "cvaug":
            # the baseline is normally an on-the-fly training transform
            prov["offline_baseline"] = True
        return prov


@dataclass
class EpisodeReport:
    task: str
    episode_id: str
    frames_in: int = 0
    frames_out: int = 0
    augmented: int = 0
    skipped: int = 0
    errors: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "episode_id": self.episode_id,
            "frames_in": self.frames_in,
            "frames_out": self.frames_out,
            "augmented": self.augmented,
            "skipped": self.skipped,
            "errors": self.errors,
        }


@dataclass
class JobReport:
    mode: str
    episodes: list[EpisodeReport]
    wall_time_s: float = 0.0
    mean_frame_ms: float = 0.0

    @property
    def has_errors(self) -> bool:
        return any(ep.errors for ep in self.episodes)

    @property
    def totals(self) -> dict:
        out = {"frames_in": 0, "frames_out": 0, "augmented": 0, "skipped": 0, "errors": 0}
        for ep in self.episodes:
            out["frames_in"] += ep.frames_in
            out["frames_out"] += ep.frames_out
            out["augmented"] += ep.augmented
            out["skipped"] += ep.skipped
            out["errors"] += len(ep.errors)
        return out

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "episodes": [ep.to_json() for ep in self.episodes],
            "totals": self.totals,
            "wall_time_s": self.wall_time_s,
            "mean_frame_ms": self.mean_frame_ms,
        }


@dataclass
class _FrameWork:
    task: str
    episode_id: str
    camera: str
    index: int
    src: Path
    dst_dir: Path
    chroma: ChromaKeySpec
    selected: bool


@dataclass
class _Outcome:
    work: _FrameWork
    augmented: bool
    wrote: int  # files written for this work item
    error: Optional[str]
    elapsed_ms: float


def _transform(work: _FrameWork, cfg: JobConfig, client: Optional[InpaintClient]) -> Frame:
    frame = imaging.load_frame(work.src)
    seed = frame_seed(cfg.global_seed, work.task, work.episode_id, work.camera, work.index)
    if cfg.mode == "cvaug":
        return baseline.cvaug(frame, seed, cfg.cvaug_params)
    matte = keying.compute_matte(frame, work.chroma)
    if cfg.mode == "rand":
        dims = imaging.frame_dims(frame)
        return compositing.composite(frame, matte, textures.sample_texture(cfg.texture, seed, dims))
    if cfg.mode == "blackout":
        return compositing.blackout(frame, matte)
    if cfg.mode == "gen":
        prompt = choose_prompt(cfg.prompts, seed)
        return client.inpaint(frame, matte, prompt, seed)
    raise JobConfigError(f"unexpected mode {cfg.mode!r}")


def _copy_through(work: _FrameWork) -> None:
    dst = work.dst_dir / work.src.name
    work.dst_dir.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(work.src, dst)


def _process_frame(work: _FrameWork, cfg: JobConfig, client: Optional[InpaintClient]) -> _Outcome:
    start = time.perf_counter()
    error = None
    augmented = False
    wrote = 0
    try:
        if work.selected:
            out = _transform(work, cfg, client)
            imaging.save_frame(out, work.dst_dir / f"frame_{work.index:06d}.png")
            augmented = True
        else:
            _copy_through(work)
        wrote = 1
    except Exception as exc:  # per-frame failures never abort the batch
        error = f"{work.camera}/frame_{work.index:06d}: {type(exc).__name__}: {exc}"
        try:
            _copy_through(work)
            wrote = 1
        except OSError as copy_exc:
            error += f" (copy-through also failed: {copy_exc})"
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return _Outcome(work=work, augmented=augmented, wrote=wrote, error=error, elapsed_ms=elapsed_ms)


def _execute(items: list, worker, n_workers: int) -> list:
    if n_workers <= 1:
        return [worker(it) for it in items]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(worker, items))


def _write_manifest_copy(ref: EpisodeRef, out_dir: Path, cfg: JobConfig) -> None:
    manifest = EpisodeManifest(
        episode_id=ref.manifest.episode_id,
        task=ref.manifest.task,
        cameras=ref.manifest.cameras,
        frame_count=ref.manifest.frame_count,
        chroma=ref.manifest.chroma,
        fps=ref.manifest.fps,
        provenance=cfg.provenance(),
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "meta.json").write_text(json.dumps(manifest.to_json(), indent=2))


def _aggregate(index_episodes: list[EpisodeRef], outcomes: list[_Outcome]) -> list[EpisodeReport]:
    reports = {
        (ref.task, ref.episode_id): EpisodeReport(task=ref.task, episode_id=ref.episode_id)
        for ref in index_episodes
    }
    for oc in sorted(outcomes, key=lambda o: (o.work.task, o.work.episode_id, o.work.camera, o.work.index)):
        rep = reports[(oc.work.task, oc.work.episode_id)]
        rep.frames_in += 1
        rep.frames_out += oc.wrote
        if oc.augmented:
            rep.augmented += 1
        else:
            rep.skipped += 1
        if oc.error:
            rep.errors.append(oc.error)
    return [reports[key] for key in sorted(reports)]


def run_job(index: DatasetIndex, cfg: JobConfig) -> JobReport:
    """Run one augmentation job over every indexed episode.

    Writes a mirror tree (plus provenance-carrying manifests) under
    cfg.output_root and a report.json beside it.  Per-frame errors are
    recorded and the source frame is copied through, so frames_out always
    equals frames_in.
    """
    if cfg.mode == "mask_export":
        return export_mask_dataset(index, cfg)
    start = time.perf_counter()
    cfg.output_root.mkdir(parents=True, exist_ok=True)
    client = InpaintClient(cfg.endpoint) if cfg.mode == "gen" else None

    work_items: list[_FrameWork] = []
    for ref in index.episodes:
        man = ref.manifest
        plan = compositing.plan_coverage(
            man.frame_count, cfg.coverage_pct,
            derive_seed(cfg.global_seed, "coverage", ref.task, ref.episode_id),
        )
        ep_out = cfg.output_root / "tasks" / ref.task / "episodes" / ref.episode_id
        _write_manifest_copy(ref, ep_out, cfg)
        for camera in man.cameras:
            for i in range(man.frame_count):
                src = ref.frame_path(camera, i)
                if src is None:
                    continue  # scan guarantees contiguity; belt and braces
                work_items.append(_FrameWork(
                    task=ref.task, episode_id=ref.episode_id, camera=camera,
                    index=i, src=src, dst_dir=ep_out / camera,
                    chroma=man.chroma, selected=i in plan,
                ))

    outcomes = _execute(work_items, lambda w: _process_frame(w, cfg, client), cfg.workers)
    report = JobReport(
        mode=cfg.mode,
        episodes=_aggregate(index.episodes, outcomes),
        wall_time_s=time.perf_counter() - start,
        mean_frame_ms=(
            sum(o.elapsed_ms for o in sorted(outcomes, key=lambda o: (o.work.task, o.work.episode_id, o.work.camera, o.work.index)))
            / len(outcomes) if outcomes else 0.0
        ),
    )
    _write_report(report, cfg)
    return report


def _process_pair(work: _FrameWork, cfg: JobConfig) -> _Outcome:
    start = time.perf_counter()
    error = None
    augmented = False
    wrote = 0
    try:
        frame = imaging.load_frame(work.src)
        seed = frame_seed(cfg.global_seed, work.task, work.episode_id, work.camera, work.index)
        matte = keying.compute_matte(frame, work.chroma)
        tex = textures.sample_texture(cfg.texture, seed, imaging.frame_dims(frame))
        paired_input = compositing.composite(frame, matte, tex)
        imaging.save_frame(paired_input, work.dst_dir / f"input_{work.index:06d}.png")
        wrote += 1
        imaging.save_gray(keying.matte_to_gray(matte), work.dst_dir / f"target_{work.index:06d}.png")
        wrote += 1
        augmented = True
    except Exception as exc:
        error = f"{work.camera}/frame_{work.index:06d}: {type(exc).__name__}: {exc}"
        if wrote == 0:
            try:
                work.dst_dir.mkdir(parents=True, exist_ok=True)
                shutil.copyfile(work.src, work.dst_dir / f"input_{work.index:06d}{work.src.suffix}")
                wrote += 1
            except OSError as copy_exc:
                error += f" (copy-through also failed: {copy_exc})"
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return _Outcome(work=work, augmented=augmented, wrote=wrote, error=error, elapsed_ms=elapsed_ms)


def export_mask_dataset(index: DatasetIndex, cfg: JobConfig) -> JobReport:
    """Write (random-texture composite, matte target) training pairs.

    Every frame gets a pair regardless of coverage_pct: the exported set
    keeps the 1:1 frame contract for masking-network training.
    """
    if cfg.texture is None:
        raise JobConfigError("mask_export requires a texture source")
    start = time.perf_counter()
    pairs_root = cfg.output_root / "pairs"
    pairs_root.mkdir(parents=True, exist_ok=True)

    work_items: list[_FrameWork] = []
    for ref in index.episodes:
        man = ref.manifest
        ep_out = pairs_root / ref.task / ref.episode_id
        _write_manifest_copy(ref, ep_out, cfg)
        for camera in man.cameras:
            for i in range(man.frame_count):
                src = ref.frame_path(camera, i)
                if src is None:
                    continue
                work_items.append(_FrameWork(
                    task=ref.task, episode_id=ref.episode_id, camera=camera,
                    index=i, src=src, dst_dir=ep_out / camera,
                    chroma=man.chroma, selected=True,
                ))

    outcomes = _execute(work_items, lambda w: _process_pair(w, cfg), cfg.workers)
    # a pair counts as one frame towards the 1:1 contract
    for oc in outcomes:
        oc.wrote = 1 if oc.wrote else 0
    report = JobReport(
        mode="mask_export",
        episodes=_aggregate(index.episodes, outcomes),
        wall_time_s=time.perf_counter() - start,
        mean_frame_ms=(sum(o.elapsed_ms for o in outcomes) / len(outcomes) if outcomes else 0.0),
    )
    _write_report(report, cfg)
    return report


def _write_report(report: JobReport, cfg: JobConfig) -> None:
    path = cfg.output_root / "report.json"
    path.write_text(json.dumps(report.to_json(), indent=2))


@dataclass
class Violation:
    kind: str  # count_mismatch | dimension_mismatch | missing_provenance | missing_episode | scan_issue
    task: str
    episode_id: str
    detail: str


@dataclass
class VerifyReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [vars(v) for v in self.violations],
        }


def _count_files(directory: Path, prefix: str) -> int:
    if not directory.is_dir():
        return 0
    return sum(1 for p in directory.iterdir() if p.name.startswith(prefix))


def _verify_pairs(in_index: DatasetIndex, out_root: Path) -> list[Violation]:
    violations = []
    pairs_root = out_root / "pairs"
    for ref in in_index.episodes:
        man = ref.manifest
        ep_out = pairs_root / ref.task / ref.episode_id
        if not ep_out.is_dir():
            violations.append(Violation("missing_episode", ref.task, ref.episode_id, str(ep_out)))
            continue
        meta = ep_out / "meta.json"
        prov = None
        if meta.exists():
            try:
                prov = json.loads(meta.read_text()).get("provenance")
            except ValueError:
                prov = None
        if not prov:
            violations.append(Violation("missing_provenance", ref.task, ref.episode_id, str(meta)))
        for camera in man.cameras:
            cam_out = ep_out / camera
            for prefix in ("input_", "target_"):
                n = _count_files(cam_out, prefix)
                if n != man.frame_count:
                    violations.append(Violation(
                        "count_mismatch", ref.task, ref.episode_id,
                        f"{camera}: {n} {prefix}files, expected {man.frame_count}",
                    ))
            for i in range(man.frame_count):
                src = ref.frame_path(camera, i)
                pair_in = cam_out / f"input_{i:06d}.png"
                if src is None or not pair_in.exists():
                    continue  # already reported as count mismatch
                if imaging.read_dims(src) != imaging.read_dims(pair_in):
                    violations.append(Violation(
                        "dimension_mismatch", ref.task, ref.episode_id,
                        f"{camera}/input_{i:06d}.png",
                    ))
    return violations


def verify_dataset(in_root: str | Path, out_root: str | Path) -> VerifyReport:
    """Check the 1:1 frame contract between an input and an output tree.

    Asserts per-episode frame-count equality, provenance presence in
    output manifests, and per-frame dimension equality.  Violations are
    report entries, never exceptions.  Mask-export pair trees are detected
    and verified against the same contract.
    """
    in_root, out_root = Path(in_root), Path(out_root)
    in_index = scan_dataset(in_root)
    if (out_root / "pairs").is_dir():
        return VerifyReport(violations=_verify_pairs(in_index, out_root))
    violations: list[Violation] = []
    for ref in in_index.episodes:
        ep_out = out_root / "tasks" / ref.task / "episodes" / ref.episode_id
        if not ep_out.is_dir():
            violations.append(Violation("missing_episode", ref.task, ref.episode_id, str(ep_out)))
            continue
        prov = None
        meta = ep_out / "meta.json"
        if meta.exists():
            try:
                prov = json.loads(meta.read_text()).get("provenance")
            except ValueError:
                prov = None
        if not prov:
            violations.append(Violation(
                "missing_provenance", ref.task, ref.episode_id, str(meta),
            ))
        for camera in ref.manifest.cameras:
            n = _count_files(ep_out / camera, "frame_")
            if n != ref.manifest.frame_count:
                violations.append(Violation(
                    "count_mismatch", ref.task, ref.episode_id,
                    f"{camera}: {n} frames, expected {ref.manifest.frame_count}",
                ))
            for i in range(ref.manifest.frame_count):
                src = ref.frame_path(camera, i)
                dst = frame_file(ep_out / camera, i)
                if src is None or dst is None:
                    continue  # absence already reported as a count mismatch
                if imaging.read_dims(src) != imaging.read_dims(dst):
                    violations.append(Violation(
                        "dimension_mismatch", ref.task, ref.episode_id,
                        f"{camera}/frame_{i:06d}",
                    ))
    return VerifyReport(violations=violations)


def default_workers() -> int:
    env = os.environ.get("GREENAUG_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring bad GREENAUG_WORKERS=%r", env)
    return 1
