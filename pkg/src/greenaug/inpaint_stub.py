"""Offline conformance stub for the inpainting protocol.

Fills the masked (background) region with a solid colour using a soft
blend of the wire mask, so its output equals compositing the frame over
that colour.  Failure modes are switchable for client testing: forced
error statuses, response delays, foreground corruption, wrong output
dimensions.  Arrival times of requests are recorded so retry/backoff
schedules can be asserted.
"""

from __future__ import annotations

import base64
import errno
import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from . import imaging
from .errors import BindError


@dataclass
class StubBehaviour:
    fill: tuple[int, int, int] = (0, 0, 255)
    fail_status: int = 503
    fail_count: int = 0          # fail this many requests first; -1 = always
    delay_s: float = 0.0
    corrupt_foreground: bool = False
    wrong_dims: bool = False


@dataclass
class _StubState:
    behaviour: StubBehaviour
    lock: threading.Lock = field(default_factory=threading.Lock)
    request_times: list[float] = field(default_factory=list)
    request_body_hashes: list[str] = field(default_factory=list)
    served: int = 0


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    timeout = 30  # idle keep-alive connections must not pin threads
    state: _StubState  # bound per server

    def log_message(self, fmt, *args):  # keep test output clean
        pass

    def _reply(self, status: int, body: bytes, content_type: str = "application/json"):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/healthz":
            if self.state.behaviour.delay_s:
                time.sleep(self.state.behaviour.delay_s)
            self._reply(200, b'{"ok": true}')
        else:
            self._reply(404, b'{"error": "not found"}')

    def do_POST(self):
        if self.path != "/v1/inpaint":
            self._reply(404, b'{"error": "not found"}')
            return
        st = self.state
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length)
        with st.lock:
            st.request_times.append(time.monotonic())
            st.request_body_hashes.append(hashlib.sha256(raw).hexdigest())
            must_fail = st.behaviour.fail_count == -1 or st.served < st.behaviour.fail_count
            st.served += 1
        if st.behaviour.delay_s:
            time.sleep(st.behaviour.delay_s)
        if must_fail:
            self._reply(st.behaviour.fail_status, b'{"error": "induced failure"}')
            return
        try:
            body = json.loads(raw)
            image = imaging.decode_frame(base64.b64decode(body["image"]))
            mask = imaging.decode_gray(base64.b64decode(body["mask"]))
        except Exception as exc:
            self._reply(400, json.dumps({"error": str(exc)}).encode())
            return
        if mask.shape != image.shape[:2]:
            self._reply(400, b'{"error": "image/mask dimension mismatch"}')
            return
        out = _render(image, mask, st.behaviour)
        reply = json.dumps({"image": base64.b64encode(imaging.encode_png(out)).decode("ascii")})
        self._reply(200, reply.encode())


def _render(image: np.ndarray, mask: np.ndarray, behaviour: StubBehaviour) -> np.ndarray:
    h, w = image.shape[:2]
    fill = imaging.new_frame(w, h, behaviour.fill)
    if behaviour.corrupt_foreground:
        out = fill  # ignores the mask: bleeds over the foreground
    else:
        weight = (mask.astype(np.float32) / 255.0)[:, :, None]
        out = imaging.quantize_u8(
            (1.0 - weight) * image.astype(np.float32) + weight * fill.astype(np.float32)
        )
    if behaviour.wrong_dims:
        out = np.pad(out, ((0, 1), (0, 1), (0, 0)), mode="edge")
    return out


class InpaintStub:
    """In-process stub server; also runnable via the CLI for manual use."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0,
                 behaviour: StubBehaviour | None = None):
        self.state = _StubState(behaviour=behaviour or StubBehaviour())
        handler = type("BoundHandler", (_Handler,), {"state": self.state})
        server_cls = type(
            "StubServer", (ThreadingHTTPServer,), {"block_on_close": False}
        )
        try:
            self._server = server_cls((host, port), handler)
        except OSError as exc:
            if exc.errno in (errno.EADDRINUSE, errno.EACCES):
                raise BindError(f"{host}:{port}: {exc}") from exc
            raise
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def url(self) -> str:
        host = self._server.server_address[0]
        return f"http://{host}:{self.port}"

    @property
    def request_times(self) -> list[float]:
        with self.state.lock:
            return list(self.state.request_times)

    @property
    def request_body_hashes(self) -> list[str]:
        with self.state.lock:
            return list(self.state.request_body_hashes)

    def start(self) -> "InpaintStub":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._server.shutdown()
        self._server.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def serve_forever(host: str, port: int, fill: tuple[int, int, int] = (0, 0, 255)):
    """Blocking entry point used by the CLI subcommand."""
    stub = InpaintStub(host, port, StubBehaviour(fill=fill))
    print(f"inpaint stub listening on {stub.url} (fill {fill})", flush=True)
    try:
        stub._server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        stub._server.server_close()
