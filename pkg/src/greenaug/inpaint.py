"""HTTP client for an external generative-inpainting service.

Wire protocol: POST {base_url}/v1/inpaint with a JSON body holding
base64 PNG image + mask (mask 255 = region to inpaint = background),
prompt, seed, steps, guidance; response is {"image": <base64 PNG>}.
A conformance stub speaking the same protocol ships in inpaint_stub.
"""

from __future__ import annotations

import base64
import json
import os
import threading
import time
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
import requests

from . import imaging
from .errors import ServiceError, ServiceTimeout, ShapeMismatch
from .imaging import Frame, Matte
from .seeding import derive_seed

ENV_ENDPOINT = "GREENAUG_INPAINT_URL"

DEFAULT_STEPS = 4
DEFAULT_GUIDANCE = 1.5


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    timeout: float = 30.0
    max_retries: int = 3
    backoff: float = 0.5
    binary_mask: bool = False
    max_inflight: int = 4

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @classmethod
    def from_env(cls, base_url: Optional[str] = None, **kwargs) -> "EndpointConfig":
        url = base_url or os.environ.get(ENV_ENDPOINT)
        if not url:
            raise ValueError(f"no endpoint given and {ENV_ENDPOINT} unset")
        return cls(base_url=url, **kwargs)


@dataclass(frozen=True)
class InpaintRequest:
    image: bytes
    mask: bytes
    prompt: str
    negative_prompt: Optional[str] = None
    seed: int = 0
    steps: int = DEFAULT_STEPS
    guidance: float = DEFAULT_GUIDANCE

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")

    def to_json(self) -> dict:
        body = {
            "image": base64.b64encode(self.image).decode("ascii"),
            "mask": base64.b64encode(self.mask).decode("ascii"),
            "prompt": self.prompt,
            "seed": self.seed,
            "steps": self.steps,
            "guidance": self.guidance,
        }
        if self.negative_prompt:
            body["negative_prompt"] = self.negative_prompt
        return body


class HealthStatus(NamedTuple):
    ok: bool
    latency_ms: float


def matte_to_wire_mask(matte: Matte, binary: bool = False) -> np.ndarray:
    """Invert a matte into the wire mask (255 = inpaint = background)."""
    mask = imaging.quantize_u8(255.0 * (1.0 - matte.astype(np.float64)))
    if binary:
        mask = np.where(mask >= 128, 255, 0).astype(np.uint8)
    return mask


def wire_mask_to_matte(mask: np.ndarray) -> Matte:
    return (1.0 - mask.astype(np.float32) / 255.0).astype(np.float32)


def choose_prompt(prompts: Sequence[str], frame_seed: int) -> str:
    """Deterministic prompt rotation keyed by the frame seed."""
    if not prompts:
        raise ValueError("prompt list is empty")
    return prompts[derive_seed(frame_seed, "prompt") % len(prompts)]


class InpaintClient:
    """Thread-safe client with retry/backoff and a bounded in-flight limit."""

    def __init__(self, cfg: EndpointConfig):
        self.cfg = cfg
        self._gate = threading.BoundedSemaphore(max(1, cfg.max_inflight))

    def _post_with_retries(self, body: dict) -> dict:
        url = self.cfg.base_url.rstrip("/") + "/v1/inpaint"
        payload = json.dumps(body)
        last_exc: Exception | None = None
        for attempt in range(self.cfg.max_retries + 1):
            if attempt > 0:
                time.sleep(self.cfg.backoff * 2 ** (attempt - 1))
            try:
                with self._gate:
                    resp = requests.post(
                        url,
                        data=payload,
                        headers={"Content-Type": "application/json"},
                        timeout=self.cfg.timeout,
                    )
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_exc = exc
                continue
            if resp.status_code // 100 == 2:
                return resp.json()
            if resp.status_code // 100 == 5:
                last_exc = ServiceError(resp.status_code, resp.text[:200])
                continue
            raise ServiceError(resp.status_code, resp.text[:200])
        if isinstance(last_exc, ServiceError):
            raise last_exc
        raise ServiceTimeout(f"{url}: retries exhausted ({last_exc})")

    def inpaint(
        self,
        frame: Frame,
        matte: Matte,
        prompt: str,
        seed: int,
        steps: int = DEFAULT_STEPS,
        guidance: float = DEFAULT_GUIDANCE,
        negative_prompt: Optional[str] = None,
    ) -> Frame:
        """Inpaint the keyed background of a frame; foreground is locked.

        Pixels with matte alpha exactly 1 are restored from the source
        after the round trip, whatever the service returned for them.
        """
        imaging.validate_frame(frame)
        imaging.validate_matte(matte)
        if frame.shape[:2] != matte.shape:
            raise ShapeMismatch(f"frame {frame.shape[:2]} vs matte {matte.shape}")
        if float(matte.min()) >= 1.0:
            # nothing to inpaint; skip the network round trip entirely
            return frame.copy()
        mask = matte_to_wire_mask(matte, binary=self.cfg.binary_mask)
        req = InpaintRequest(
            image=imaging.encode_png(frame),
            mask=imaging.encode_gray_png(mask),
            prompt=prompt,
            negative_prompt=negative_prompt,
            seed=seed,
            steps=steps,
            guidance=guidance,
        )
        reply = self._post_with_retries(req.to_json())
        try:
            out = imaging.decode_frame(base64.b64decode(reply["image"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError(200, f"malformed response body: {exc}") from exc
        if out.shape != frame.shape:
            raise ShapeMismatch(f"service returned {out.shape[:2]}, expected {frame.shape[:2]}")
        locked = matte >= 1.0
        out[locked] = frame[locked]
        return out

    def health_check(self) -> HealthStatus:
        """GET /healthz; failures of any kind map to ok=False."""
        url = self.cfg.base_url.rstrip("/") + "/healthz"
        start = time.perf_counter()
        try:
            resp = requests.get(url, timeout=self.cfg.timeout)
            ok = resp.status_code // 100 == 2
        except requests.RequestException:
            ok = False
        return HealthStatus(ok=ok, latency_ms=(time.perf_counter() - start) * 1000.0)


def inpaint(
    frame: Frame,
    matte: Matte,
    prompt: str,
    seed: int,
    cfg: EndpointConfig,
    **kwargs,
) -> Frame:
    return InpaintClient(cfg).inpaint(frame, matte, prompt, seed, **kwargs)


def health_check(cfg: EndpointConfig) -> HealthStatus:
    return InpaintClient(cfg).health_check()
