"""Command-line entry point: one binary, one subcommand per capability."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bench as bench_mod
from . import imaging, keying, pipeline, textures
from .errors import GreenaugError, JobConfigError
from .inpaint import ENV_ENDPOINT, EndpointConfig
from .keying import ChromaKeySpec
from .pipeline import DEFAULT_GLOBAL_SEED, JobConfig, run_job, scan_dataset, verify_dataset


class UsageError(Exception):
    pass


def _formatter(prog):
    # fixed width keeps --help output stable across terminals
    return argparse.HelpFormatter(prog, width=96)


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return (int(w), int(h))
    except ValueError as exc:
        raise UsageError(f"--size expects WxH, got {text!r}") from exc


def _parse_bind(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise UsageError(f"--bind expects HOST:PORT, got {text!r}")
    return host, int(port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenaug",
        description="Replace green-screen backgrounds in episode datasets with "
                    "random textures, generated scenes, or blackout mattes.",
        formatter_class=_formatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser(
        "augment", formatter_class=_formatter,
        help="run a batch augmentation job over a dataset",
    )
    p.add_argument("--root", required=True, help="dataset root (contains tasks/)")
    p.add_argument("--mode", required=True,
                   choices=["rand", "gen", "blackout", "cvaug", "mask-export"],
                   help="augmentation mode")
    p.add_argument("--out", required=True, help="output root for the mirrored tree")
    p.add_argument("--textures", default=None,
                   help="texture source: DIR, solid[:#rrggbb,...], or perlin "
                        "(default: perlin; rand and mask-export only)")
    p.add_argument("--coverage", type=float, default=100.0,
                   help="percent of frames per episode to augment (default: 100)")
    p.add_argument("--seed", type=int, default=DEFAULT_GLOBAL_SEED,
                   help=f"global seed (default: {DEFAULT_GLOBAL_SEED})")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: $GREENAUG_WORKERS or 1)")
    p.add_argument("--endpoint", default=None,
                   help=f"inpaint service URL (gen only; default: ${ENV_ENDPOINT})")
    p.add_argument("--prompt", action="append", default=None,
                   help="inpaint prompt, repeatable (gen only; default: five-room rotation)")

    p = sub.add_parser(
        "entropy", formatter_class=_formatter,
        help="measure mean luma-histogram entropy of a texture source",
    )
    p.add_argument("--textures", required=True,
                   help="texture source: DIR, solid[:#rrggbb,...], or perlin")
    p.add_argument("--samples", type=int, default=16, help="sample count (default: 16)")
    p.add_argument("--size", default="320x240", help="sample dims WxH (default: 320x240)")
    p.add_argument("--seed", type=int, default=DEFAULT_GLOBAL_SEED,
                   help=f"seed (default: {DEFAULT_GLOBAL_SEED})")

    p = sub.add_parser(
        "key-preview", formatter_class=_formatter,
        help="render the matte of one frame for a chroma key spec",
    )
    p.add_argument("--frame", required=True, help="input PNG/JPEG frame")
    p.add_argument("--key", required=True, help="key colour as #rrggbb")
    p.add_argument("--tola", type=float, required=True, help="inner tolerance (alpha ramp start)")
    p.add_argument("--tolb", type=float, required=True, help="outer tolerance (alpha ramp end)")
    p.add_argument("--out", required=True, help="output grayscale matte PNG")

    p = sub.add_parser(
        "serve", formatter_class=_formatter,
        help="serve the tuning UI and preview API for a dataset",
    )
    p.add_argument("--root", required=True, help="dataset root (contains tasks/)")
    p.add_argument("--bind", default="127.0.0.1:8765",
                   help="bind address (default: 127.0.0.1:8765)")
    p.add_argument("--ui", default=None,
                   help="built UI bundle directory (default: ./frontend/dist when present)")

    p = sub.add_parser(
        "verify", formatter_class=_formatter,
        help="check the 1:1 frame contract between input and output trees",
    )
    p.add_argument("--in", dest="in_root", required=True, help="input dataset root")
    p.add_argument("--out", dest="out_root", required=True, help="output dataset root")

    p = sub.add_parser(
        "bench", formatter_class=_formatter,
        help="measure per-frame processing time of a transform",
    )
    p.add_argument("--mode", default="rand", choices=["rand", "blackout", "cvaug"],
                   help="transform to time (default: rand)")
    p.add_argument("--frames", type=int, default=1000, help="iterations (default: 1000)")
    p.add_argument("--size", default="320x240", help="frame dims WxH (default: 320x240)")
    p.add_argument("--textures", default="perlin",
                   help="texture source for rand (default: perlin)")
    p.add_argument("--seed", type=int, default=1, help="seed (default: 1)")

    p = sub.add_parser(
        "stub-inpaint", formatter_class=_formatter,
        help="run the offline inpaint conformance stub",
    )
    p.add_argument("--bind", default="127.0.0.1:8808",
                   help="bind address (default: 127.0.0.1:8808)")
    p.add_argument("--fill", default="#0000ff",
                   help="solid fill colour (default: #0000ff)")

    return parser


def _cmd_augment(args) -> int:
    mode = args.mode.replace("-", "_")
    if mode in ("rand", "mask_export"):
        if args.endpoint or args.prompt:
            raise UsageError(f"--endpoint/--prompt do not apply to mode {args.mode}")
        texture = textures.parse_texture_arg(args.textures or "perlin")
        endpoint = None
        prompts = pipeline.DEFAULT_PROMPTS
    elif mode == "gen":
        if args.textures:
            raise UsageError("--textures does not apply to mode gen")
        url = args.endpoint or os.environ.get(ENV_ENDPOINT)
        if not url:
            raise UsageError(f"mode gen needs --endpoint or ${ENV_ENDPOINT}")
        endpoint = EndpointConfig(base_url=url)
        texture = None
        prompts = tuple(args.prompt) if args.prompt else pipeline.DEFAULT_PROMPTS
    else:  # blackout, cvaug
        if args.textures or args.endpoint or args.prompt:
            raise UsageError(f"--textures/--endpoint/--prompt do not apply to mode {args.mode}")
        texture = None
        endpoint = None
        prompts = pipeline.DEFAULT_PROMPTS

    index = scan_dataset(args.root)
    for issue in index.issues:
        print(f"scan: {issue.kind}: {issue.path}: {issue.detail}", file=sys.stderr)

    cfg = JobConfig(
        mode=mode,
        output_root=Path(args.out),
        texture=texture,
        prompts=prompts,
        coverage_pct=args.coverage,
        global_seed=args.seed,
        workers=args.workers if args.workers else pipeline.default_workers(),
        endpoint=endpoint,
    )
    report = run_job(index, cfg)
    totals = report.totals
    print(
        f"{mode}: {totals['frames_out']}/{totals['frames_in']} frames written, "
        f"{totals['augmented']} augmented, {totals['skipped']} copied, "
        f"{totals['errors']} errors; {report.mean_frame_ms:.3f} ms/frame, "
        f"{report.wall_time_s:.2f} s total"
    )
    print(f"report: {cfg.output_root / 'report.json'}")
    return 1 if (report.has_errors or index.issues) else 0


def _cmd_entropy(args) -> int:
    source = textures.parse_texture_arg(args.textures)
    bits = textures.dataset_entropy(source, args.samples, _parse_size(args.size), args.seed)
    print(f"{bits:.2f} bits ({args.samples} samples of {args.size})")
    return 0


def _cmd_key_preview(args) -> int:
    try:
        spec = ChromaKeySpec.from_hex(args.key, args.tola, args.tolb)
    except GreenaugError as exc:
        raise UsageError(str(exc)) from exc
    frame = imaging.load_frame(args.frame)
    matte = keying.compute_matte(frame, spec)
    imaging.save_gray(keying.matte_to_gray(matte), args.out)
    stats = keying.matte_stats(matte)
    print(f"matte written to {args.out} "
          f"(keyed_fraction {stats.keyed_fraction:.3f}, mean_alpha {stats.mean_alpha:.3f})")
    return 0


def _cmd_serve(args) -> int:
    from .service import PreviewService

    host, port = _parse_bind(args.bind)
    ui_dir = args.ui
    if ui_dir is None:
        default_ui = Path("frontend/dist")
        ui_dir = default_ui if default_ui.is_dir() else None
    index = scan_dataset(args.root)
    for issue in index.issues:
        print(f"scan: {issue.kind}: {issue.path}: {issue.detail}", file=sys.stderr)
    service = PreviewService(index, host=host, port=port, ui_dir=ui_dir)
    print(f"serving {len(index.episodes)} episodes on {service.url}", flush=True)
    service.serve_blocking()
    return 0


def _cmd_verify(args) -> int:
    report = verify_dataset(args.in_root, args.out_root)
    for v in report.violations:
        print(f"violation: {v.kind}: {v.task}/{v.episode_id}: {v.detail}")
    print(f"{len(report.violations)} violations")
    return 0 if report.ok else 1


def _cmd_bench(args) -> int:
    result = bench_mod.run_bench(
        mode=args.mode,
        frames=args.frames,
        dims=_parse_size(args.size),
        texture=textures.parse_texture_arg(args.textures),
        seed=args.seed,
    )
    print(
        f"mean per-frame: {result.mean_ms:.3f} ms "
        f"({result.frames} frames at {result.dims[0]}x{result.dims[1]}, "
        f"min {result.min_ms:.3f}, max {result.max_ms:.3f})"
    )
    return 0


def _cmd_stub_inpaint(args) -> int:
    from .inpaint_stub import serve_forever

    host, port = _parse_bind(args.bind)
    serve_forever(host, port, fill=keying.parse_hex_colour(args.fill))
    return 0


_COMMANDS = {
    "augment": _cmd_augment,
    "entropy": _cmd_entropy,
    "key-preview": _cmd_key_preview,
    "serve": _cmd_serve,
    "verify": _cmd_verify,
    "bench": _cmd_bench,
    "stub-inpaint": _cmd_stub_inpaint,
}


def run(argv: list[str] | None = None) -> int:
    """Exit codes: 0 success, 1 job errors present, 2 usage error."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, JobConfigError) as exc:
        # bad flag values and mode/flag conflicts are usage errors
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GreenaugError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: not found: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
