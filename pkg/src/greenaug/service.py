"""Local HTTP service backing the interactive chroma-tuning UI.

JSON API over stdlib http.server (CORS enabled for localhost dev):

    GET  /healthz
    GET  /api/tasks
    GET  /api/episodes?task=
    GET  /api/frame?task=&episode=&camera=&index=     -> PNG
    POST /api/preview                                 -> PNG + X-Matte-Stats header
    POST /api/params      {"task": ..., "spec": {...}}

The built UI bundle, when present, is served from "/".  Previews use the
exact per-frame seed derivation of the batch pipeline, so a preview and a
batch run with the same (frame, spec, texture, global seed) are
byte-identical.
"""

from __future__ import annotations

import errno
import json
import mimetypes
import os
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import compositing, imaging, keying, pipeline, textures
from .errors import BindError, FrameNotFound, GreenaugError, SpecInvalid, TaskNotFound
from .keying import ChromaKeySpec, MatteStats
from .pipeline import DatasetIndex
from .textures import TextureSource

_VIEWS = ("matte", "composite", "blackout")


@dataclass
class PreviewRequest:
    task: str
    episode_id: str
    camera: str
    frame_index: int
    spec: ChromaKeySpec
    view: str = "composite"
    texture: Optional[TextureSource] = None
    seed: int = pipeline.DEFAULT_GLOBAL_SEED

    @classmethod
    def from_json(cls, data: dict) -> "PreviewRequest":
        try:
            view = data.get("view", "composite")
            if view not in _VIEWS:
                raise SpecInvalid(f"view must be one of {_VIEWS}, got {view!r}")
            texture = None
            if data.get("texture") is not None:
                texture = TextureSource.from_json(data["texture"])
            return cls(
                task=str(data["task"]),
                episode_id=str(data["episode_id"]),
                camera=str(data["camera"]),
                frame_index=int(data["frame_index"]),
                spec=ChromaKeySpec.from_json(data["spec"]),
                view=view,
                texture=texture,
                seed=int(data.get("seed", pipeline.DEFAULT_GLOBAL_SEED)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, GreenaugError):
                raise
            raise SpecInvalid(f"bad preview request: {exc}") from exc


def checkerboard(dims: tuple[int, int], tile: int = 16) -> np.ndarray:
    """Mid-grey checkerboard, the default composite preview background."""
    w, h = dims
    ys, xs = np.mgrid[0:h, 0:w]
    cells = ((xs // tile) + (ys // tile)) % 2
    out = np.where(cells == 0, 96, 160).astype(np.uint8)
    return np.repeat(out[:, :, None], 3, axis=2)


class PreviewService:
    """Serves dataset frames, live previews, and parameter persistence."""

    def __init__(
        self,
        index: DatasetIndex,
        host: str = "127.0.0.1",
        port: int = 8765,
        ui_dir: Optional[str | Path] = None,
    ):
        self.index = index
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self._write_lock = threading.Lock()
        self._inflight = 0
        self._inflight_cv = threading.Condition()
        handler = type("BoundHandler", (_Handler,), {"service": self})
        server_cls = type(
            "GracefulServer", (ThreadingHTTPServer,),
            # shutdown drains in-flight requests itself; idle keep-alive
            # connections must never block closing
            {"daemon_threads": True, "block_on_close": False},
        )
        try:
            self._server = server_cls((host, port), handler)
        except OSError as exc:
            if exc.errno in (errno.EADDRINUSE, errno.EACCES):
                raise BindError(f"{host}:{port}: {exc}") from exc
            raise
        self._thread: Optional[threading.Thread] = None

    def _track_request(self, delta: int) -> None:
        with self._inflight_cv:
            self._inflight += delta
            if self._inflight == 0:
                self._inflight_cv.notify_all()

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self._server.server_address[0]}:{self.port}"

    def start(self) -> "PreviewService":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        """Let in-flight requests complete, then close the listener."""
        self._server.shutdown()
        deadline = time.monotonic() + 10.0
        with self._inflight_cv:
            while self._inflight > 0 and time.monotonic() < deadline:
                self._inflight_cv.wait(0.1)
        self._server.server_close()
        if self._thread:
            self._thread.join(timeout=10)

    def serve_blocking(self):
        try:
            self._server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            self._server.server_close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    # ---- request-independent logic, exercised directly by tests ----

    def _resolve_frame(self, task: str, episode_id: str, camera: str, index: int) -> Path:
        ref = self.index.find(task, episode_id)
        if ref is None:
            raise FrameNotFound(f"no episode {task}/{episode_id}")
        if camera not in ref.manifest.cameras or not 0 <= index < ref.manifest.frame_count:
            raise FrameNotFound(f"no frame {task}/{episode_id}/{camera}/{index}")
        path = ref.frame_path(camera, index)
        if path is None:
            raise FrameNotFound(f"missing file for {task}/{episode_id}/{camera}/{index}")
        return path

    def handle_preview(self, req: PreviewRequest) -> tuple[bytes, MatteStats]:
        path = self._resolve_frame(req.task, req.episode_id, req.camera, req.frame_index)
        frame = imaging.load_frame(path)
        matte = keying.compute_matte(frame, req.spec)
        stats = keying.matte_stats(matte)
        if req.view == "matte":
            return imaging.encode_gray_png(keying.matte_to_gray(matte)), stats
        if req.view == "blackout":
            return imaging.encode_png(compositing.blackout(frame, matte)), stats
        dims = imaging.frame_dims(frame)
        if req.texture is not None:
            seed = pipeline.frame_seed(req.seed, req.task, req.episode_id, req.camera, req.frame_index)
            background = textures.sample_texture(req.texture, seed, dims)
        else:
            background = checkerboard(dims)
        return imaging.encode_png(compositing.composite(frame, matte, background)), stats

    def save_params(self, task: str, spec: ChromaKeySpec) -> int:
        """Atomically rewrite the chroma block of every manifest of a task."""
        with self._write_lock:
            refs = self.index.episodes_for(task)
            if not refs:
                raise TaskNotFound(task)
            for ref in refs:
                data = json.loads(ref.manifest_path.read_text())
                data["chroma"] = spec.to_json()
                tmp = ref.manifest_path.with_suffix(".json.tmp")
                tmp.write_text(json.dumps(data, indent=2))
                os.replace(tmp, ref.manifest_path)
                ref.manifest.chroma = spec
            return len(refs)

    def tasks_payload(self) -> list[dict]:
        out = []
        for task in self.index.tasks:
            refs = self.index.episodes_for(task)
            out.append({
                "task": task,
                "episode_count": len(refs),
                "chroma": refs[0].manifest.chroma.to_json(),
            })
        return out

    def episodes_payload(self, task: str) -> list[dict]:
        refs = self.index.episodes_for(task)
        if not refs:
            raise TaskNotFound(task)
        return [
            {
                "episode_id": ref.episode_id,
                "cameras": list(ref.manifest.cameras),
                "frame_count": ref.manifest.frame_count,
                "fps": ref.manifest.fps,
                "chroma": ref.manifest.chroma.to_json(),
            }
            for ref in refs
        ]


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    timeout = 5  # reap idle keep-alive connections
    service: PreviewService

    def log_message(self, fmt, *args):
        pass

    def do_GET(self):
        self.service._track_request(1)
        try:
            self._get()
        finally:
            self.service._track_request(-1)

    def do_POST(self):
        self.service._track_request(1)
        try:
            self._post()
        finally:
            self.service._track_request(-1)

    def _send(self, status: int, body: bytes, content_type: str, extra: Optional[dict] = None):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        for key, value in (extra or {}).items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload) -> None:
        self._send(status, json.dumps(payload).encode(), "application/json")

    def _send_error_json(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", "0"))
        return json.loads(self.rfile.read(length))

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _get(self):
        url = urlparse(self.path)
        query = {k: v[0] for k, v in parse_qs(url.query).items()}
        try:
            if url.path == "/healthz":
                self._send_json(200, {"ok": True})
            elif url.path == "/api/tasks":
                self._send_json(200, self.service.tasks_payload())
            elif url.path == "/api/episodes":
                self._send_json(200, self.service.episodes_payload(query.get("task", "")))
            elif url.path == "/api/frame":
                path = self.service._resolve_frame(
                    query.get("task", ""), query.get("episode", ""),
                    query.get("camera", ""), int(query.get("index", "-1")),
                )
                self._send(200, imaging.encode_png(imaging.load_frame(path)), "image/png")
            else:
                self._serve_static(url.path)
        except TaskNotFound as exc:
            self._send_error_json(404, f"unknown task: {exc}")
        except FrameNotFound as exc:
            self._send_error_json(404, str(exc))
        except ValueError as exc:
            self._send_error_json(400, str(exc))

    def _post(self):
        url = urlparse(self.path)
        try:
            if url.path == "/api/preview":
                req = PreviewRequest.from_json(self._read_body())
                png, stats = self.service.handle_preview(req)
                self._send(200, png, "image/png", extra={
                    "X-Matte-Stats": json.dumps({
                        "keyed_fraction": stats.keyed_fraction,
                        "mean_alpha": stats.mean_alpha,
                    }),
                })
            elif url.path == "/api/params":
                body = self._read_body()
                spec = ChromaKeySpec.from_json(body.get("spec", {}))
                updated = self.service.save_params(str(body.get("task", "")), spec)
                self._send_json(200, {"ok": True, "episodes_updated": updated})
            else:
                self._send_error_json(404, "not found")
        except SpecInvalid as exc:
            self._send_error_json(422, str(exc))
        except TaskNotFound as exc:
            self._send_error_json(404, f"unknown task: {exc}")
        except FrameNotFound as exc:
            self._send_error_json(404, str(exc))
        except (ValueError, json.JSONDecodeError) as exc:
            self._send_error_json(400, str(exc))

    def _serve_static(self, path: str):
        ui_dir = self.service.ui_dir
        if ui_dir is None or not ui_dir.is_dir():
            if path == "/":
                self._send(200, b"<html><body>greenaug preview service (no UI bundle configured)</body></html>",
                           "text/html")
            else:
                self._send_error_json(404, "not found")
            return
        rel = path.lstrip("/") or "index.html"
        candidate = (ui_dir / rel).resolve()
        if not candidate.is_relative_to(ui_dir) or not candidate.is_file():
            self._send_error_json(404, "not found")
            return
        ctype = mimetypes.guess_type(candidate.name)[0] or "application/octet-stream"
        self._send(200, candidate.read_bytes(), ctype)


def serve(index: DatasetIndex, bind: tuple[str, int], ui_dir: Optional[str | Path] = None) -> PreviewService:
    """Start a PreviewService on host:port; raises BindError if taken."""
    host, port = bind
    return PreviewService(index, host=host, port=port, ui_dir=ui_dir).start()
