"""Remote adapters speaking the wire protocol, with retry and backoff.

Each adapter is stateless per call. Failed requests are retried up to
``endpoint.max_retries`` times (so at most max_retries + 1 attempts) with
exponential backoff; transport errors and 5xx responses are retryable, 4xx
responses are not. The HTTP transport is injectable so tests can drive the
retry machinery with scripted faults.
"""

from __future__ import annotations

import json
import os
import time
import urllib.error
import urllib.request
from typing import Callable, Protocol

from ..errors import (
    ConfigError,
    DimensionMismatchError,
    ProviderResponseError,
    ProviderUnavailableError,
    ValidationError,
)
from ..imaging import FrameSequence, ImageBuffer
from ..model import MaskSet, PromptBundle
from .base import Embedding, ProviderEndpoint, l2_normalize
from . import wire

TOKEN_ENV_VAR = "FRAMEBRIDGE_TOKEN"

DEFAULT_FPS = 8.0


class TransportError(Exception):
    """The request never produced an HTTP response (connect/timeout/reset)."""


class Transport(Protocol):
    def post(self, url: str, payload: dict, *, timeout_s: float,
             headers: dict[str, str]) -> tuple[int, bytes]: ...


class UrllibTransport:
    """Stdlib HTTP transport; raises TransportError on anything pre-response."""

    def post(self, url: str, payload: dict, *, timeout_s: float,
             headers: dict[str, str]) -> tuple[int, bytes]:
        body = json.dumps(payload).encode("utf-8")
        request = urllib.request.Request(
            url, data=body, method="POST",
            headers={"Content-Type": "application/json", **headers},
        )
        try:
            with urllib.request.urlopen(request, timeout=timeout_s) as resp:
                return resp.status, resp.read()
        except urllib.error.HTTPError as exc:
            return exc.code, exc.read()
        except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as exc:
            raise TransportError(str(exc)) from exc


def bearer_headers(token: str | None = None) -> dict[str, str]:
    """Authorization header from an explicit token or the environment."""
    token = token if token is not None else os.environ.get(TOKEN_ENV_VAR, "")
    return {"Authorization": f"Bearer {token}"} if token else {}


class RemoteProvider:
    """Shared request/retry plumbing for all role adapters."""

    def __init__(self, endpoint: ProviderEndpoint, *,
                 transport: Transport | None = None,
                 sleep: Callable[[float], None] = time.sleep,
                 token: str | None = None):
        self.endpoint = endpoint
        self.transport = transport if transport is not None else UrllibTransport()
        self.sleep = sleep
        self.headers = bearer_headers(token)
        self.provider_id = f"{endpoint.role}@{endpoint.base_url}"

    def _post(self, route: str, payload: dict) -> dict:
        url = self.endpoint.base_url.rstrip("/") + route
        timeout_s = self.endpoint.timeout_ms / 1000.0
        attempts = self.endpoint.max_retries + 1
        last_error: BaseException | None = None
        for attempt in range(attempts):
            try:
                status, body = self.transport.post(
                    url, payload, timeout_s=timeout_s, headers=self.headers
                )
            except TransportError as exc:
                last_error = exc
            else:
                if 200 <= status < 300:
                    try:
                        return json.loads(body.decode("utf-8"))
                    except (ValueError, UnicodeDecodeError) as exc:
                        raise ProviderResponseError(
                            f"{self.provider_id}: response is not valid JSON: {exc}",
                            role=self.endpoint.role, provider_id=self.provider_id,
                            payload=body,
                        ) from exc
                code, message = _error_fields(body)
                if status < 500:
                    raise ProviderResponseError(
                        f"{self.provider_id}: HTTP {status} {code}: {message}",
                        role=self.endpoint.role, provider_id=self.provider_id,
                        payload=body,
                    )
                last_error = ProviderResponseError(
                    f"HTTP {status} {code}: {message}",
                    role=self.endpoint.role, provider_id=self.provider_id, payload=body,
                )
            if attempt < attempts - 1:
                self.sleep(self.endpoint.backoff_base_ms * (2 ** attempt) / 1000.0)
        raise ProviderUnavailableError(
            f"{self.provider_id}: {attempts} attempts failed, last error: {last_error}",
            role=self.endpoint.role, provider_id=self.provider_id,
            attempts=attempts, last_error=last_error,
        )

    def _field(self, response: dict, key: str):
        if key not in response:
            raise ProviderResponseError(
                f"{self.provider_id}: response missing field {key!r}",
                role=self.endpoint.role, provider_id=self.provider_id, payload=response,
            )
        return response[key]


def _error_fields(body: bytes) -> tuple[str, str]:
    try:
        data = json.loads(body.decode("utf-8"))
        return str(data.get("code", "unknown")), str(data.get("message", ""))
    except (ValueError, UnicodeDecodeError):
        return "unknown", body[:200].decode("utf-8", "replace")


class RemoteEnhancer(RemoteProvider):
    def enhance(self, user_text: str, image_caption_hint: str = "") -> PromptBundle:
        if not user_text.strip():
            raise ValidationError("user_text must be non-empty")
        response = self._post(wire.ROUTES["enhance"],
                              {"text": user_text, "hint": image_caption_hint})
        try:
            return PromptBundle(
                keywords=tuple(self._field(response, "keywords")),
                frame_state=self._field(response, "frame_state"),
                optimization_prompt=self._field(response, "optimization_prompt"),
                raw_user_text=user_text,
            )
        except ValidationError as exc:
            raise ProviderResponseError(
                f"{self.provider_id}: malformed prompt bundle: {exc}",
                role=self.endpoint.role, provider_id=self.provider_id, payload=response,
            ) from exc


class RemoteDetector(RemoteProvider):
    def __init__(self, endpoint: ProviderEndpoint, *, max_entries_per_label: int = 4, **kw):
        super().__init__(endpoint, **kw)
        self.max_entries_per_label = max_entries_per_label

    def detect(self, image: ImageBuffer, labels: list[str]) -> MaskSet:
        if not labels:
            raise ValidationError("label list must be non-empty")
        response = self._post(wire.ROUTES["detect"], {
            "image_png_b64": wire.image_to_b64(image),
            "labels": list(labels),
        })
        entries = self._field(response, "entries")
        per_label: dict[str, int] = {}
        kept = []
        for item in entries:
            label = item.get("label", "")
            per_label[label] = per_label.get(label, 0) + 1
            if per_label[label] <= self.max_entries_per_label:
                kept.append(item)
        try:
            return wire.mask_set_from_wire(kept, image.width, image.height)
        except (KeyError, ValidationError, DimensionMismatchError) as exc:
            raise ProviderResponseError(
                f"{self.provider_id}: malformed mask entries: {exc}",
                role=self.endpoint.role, provider_id=self.provider_id, payload=response,
            ) from exc


class RemoteKeyframeGenerator(RemoteProvider):
    def generate_keyframe(self, image: ImageBuffer, masks: MaskSet,
                          prompt: str, seed: int) -> ImageBuffer:
        if not prompt.strip():
            raise ValidationError("prompt must be non-empty")
        response = self._post(wire.ROUTES["keyframe"], {
            "image_png_b64": wire.image_to_b64(image),
            "masks": wire.mask_set_to_wire(masks),
            "prompt": prompt,
            "seed": seed,
        })
        out = wire.image_from_b64(self._field(response, "image_png_b64"))
        if out.size != image.size:
            raise ProviderResponseError(
                f"{self.provider_id}: keyframe is {out.size}, input was {image.size}",
                role=self.endpoint.role, provider_id=self.provider_id,
            )
        return out


class RemoteInterpolator(RemoteProvider):
    def __init__(self, endpoint: ProviderEndpoint, *, fps: float = DEFAULT_FPS, **kw):
        super().__init__(endpoint, **kw)
        self.fps = fps

    def interpolate(self, start: ImageBuffer, end: ImageBuffer, prompt: str,
                    frame_count: int, seed: int) -> FrameSequence:
        if start.size != end.size:
            raise DimensionMismatchError(
                f"start {start.size} and end {end.size} frames differ in size"
            )
        if frame_count < 2:
            raise ValidationError("frame_count must be >= 2")
        response = self._post(wire.ROUTES["interpolate"], {
            "start_png_b64": wire.image_to_b64(start),
            "end_png_b64": wire.image_to_b64(end),
            "prompt": prompt,
            "frame_count": frame_count,
            "seed": seed,
        })
        frames = tuple(wire.image_from_b64(f) for f in self._field(response, "frames"))
        if len(frames) != frame_count:
            raise ProviderResponseError(
                f"{self.provider_id}: got {len(frames)} frames, asked for {frame_count}",
                role=self.endpoint.role, provider_id=self.provider_id,
            )
        return FrameSequence(frames=frames, frames_per_second=self.fps)


class RemoteEmbedder(RemoteProvider):
    """Image and text embeddings from one remote space.

    The first successful call of each modality pins the dimension; image and
    text dimensions disagreeing is a configuration error, not a retry case.
    """

    def __init__(self, endpoint: ProviderEndpoint, **kw):
        super().__init__(endpoint, **kw)
        self._image_dim: int | None = None
        self._text_dim: int | None = None

    def _to_embedding(self, response: dict) -> Embedding:
        values = self._field(response, "values")
        if not values:
            raise ProviderResponseError(
                f"{self.provider_id}: empty embedding",
                role=self.endpoint.role, provider_id=self.provider_id, payload=response,
            )
        return Embedding(values=l2_normalize(values), normalized=True)

    def _check_dims(self) -> None:
        if (self._image_dim is not None and self._text_dim is not None
                and self._image_dim != self._text_dim):
            raise ConfigError(
                f"{self.provider_id}: image embeddings have dimension "
                f"{self._image_dim} but text embeddings {self._text_dim}"
            )

    def embed_image(self, image: ImageBuffer) -> Embedding:
        emb = self._to_embedding(self._post(wire.ROUTES["embed_image"],
                                            {"image_png_b64": wire.image_to_b64(image)}))
        self._image_dim = emb.dimension
        self._check_dims()
        return emb

    def embed_text(self, text: str) -> Embedding:
        emb = self._to_embedding(self._post(wire.ROUTES["embed_text"], {"text": text}))
        self._text_dim = emb.dimension
        self._check_dims()
        return emb


class RemoteQualityScorer(RemoteProvider):
    def score_quality(self, frame: ImageBuffer) -> float:
        response = self._post(wire.ROUTES["score"],
                              {"image_png_b64": wire.image_to_b64(frame)})
        score = float(self._field(response, "score"))
        if not (0.0 <= score <= 1.0):
            raise ProviderResponseError(
                f"{self.provider_id}: score {score} outside [0, 1]",
                role=self.endpoint.role, provider_id=self.provider_id, payload=response,
            )
        return score


def remote_provider_set(endpoints: dict[str, ProviderEndpoint], *,
                        transport: Transport | None = None,
                        sleep: Callable[[float], None] = time.sleep,
                        token: str | None = None,
                        fps: float = DEFAULT_FPS):
    """Build a ProviderSet of remote adapters from per-role endpoints.

    The scorer role is optional; every other role must be present.
    """
    from .base import ProviderSet

    kw = {"transport": transport, "sleep": sleep, "token": token}
    required = ("enhancer", "detector", "keyframe", "interpolator", "embedder")
    missing = [r for r in required if r not in endpoints]
    if missing:
        raise ConfigError(f"missing provider endpoints for roles: {missing}")
    return ProviderSet(
        enhancer=RemoteEnhancer(endpoints["enhancer"], **kw),
        detector=RemoteDetector(endpoints["detector"], **kw),
        keyframe=RemoteKeyframeGenerator(endpoints["keyframe"], **kw),
        interpolator=RemoteInterpolator(endpoints["interpolator"], fps=fps, **kw),
        embedder=RemoteEmbedder(endpoints["embedder"], **kw),
        scorer=RemoteQualityScorer(endpoints["scorer"], **kw) if "scorer" in endpoints else None,
    )
