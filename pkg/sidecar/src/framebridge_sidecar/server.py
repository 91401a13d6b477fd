"""HTTP server speaking the model-provider wire protocol.

One POST route per enabled model role plus GET /v1/health. Disabled routes
answer with the distinct error code "route_disabled". Request concurrency is
bounded by a semaphore; each route shares a single backend instance.

Endpoint anchoring is enforced server-side: the /v1/interpolate response
echoes the request's start and end PNG payloads verbatim in frame 0 and
frame T-1, so anchoring survives backends that re-encode frames.
"""

from __future__ import annotations

import base64
import io
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
from PIL import Image as _PILImage

from .backends import BackendInputError, load_backends
from .config import SidecarConfig

ROUTE_PATHS = {
    "/v1/enhance": "enhance",
    "/v1/detect": "detect",
    "/v1/keyframe": "keyframe",
    "/v1/interpolate": "interpolate",
    "/v1/embed_image": "embed",
    "/v1/embed_text": "embed",
    "/v1/score": "score",
}


def _png_to_array(data_b64: str) -> np.ndarray:
    raw = base64.b64decode(data_b64)
    with _PILImage.open(io.BytesIO(raw)) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def _array_to_png(image: np.ndarray) -> str:
    buf = io.BytesIO()
    _PILImage.fromarray(image, mode="RGB").save(buf, format="PNG", optimize=False)
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _mask_to_png(mask: np.ndarray) -> str:
    plane = np.where(mask.astype(bool), 255, 0).astype(np.uint8)
    buf = io.BytesIO()
    _PILImage.fromarray(plane, mode="L").save(buf, format="PNG", optimize=False)
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _png_to_mask(data_b64: str) -> np.ndarray:
    raw = base64.b64decode(data_b64)
    with _PILImage.open(io.BytesIO(raw)) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8) >= 128


def handle_request(path: str, payload: dict, backends: dict) -> tuple[int, dict]:
    """Dispatch one wire-protocol request; returns (HTTP status, JSON body)."""
    route = ROUTE_PATHS.get(path)
    if route is None:
        return 404, {"code": "unknown_route", "message": path}
    backend = backends.get(route)
    if backend is None:
        return 404, {"code": "route_disabled", "message": f"route {route!r} is disabled"}
    try:
        if path == "/v1/enhance":
            return 200, backend.enhance(str(payload["text"]), str(payload.get("hint", "")))

        if path == "/v1/detect":
            image = _png_to_array(payload["image_png_b64"])
            entries = backend.detect(image, list(payload["labels"]))
            return 200, {"entries": [
                {"label": e["label"], "confidence": e["confidence"],
                 "mask_png_b64": _mask_to_png(e["mask"])}
                for e in entries
            ]}

        if path == "/v1/keyframe":
            image = _png_to_array(payload["image_png_b64"])
            masks = [_png_to_mask(m["mask_png_b64"]) for m in payload.get("masks", [])]
            out = backend.generate(image, masks, str(payload["prompt"]),
                                   int(payload["seed"]))
            return 200, {"image_png_b64": _array_to_png(out)}

        if path == "/v1/interpolate":
            start_b64 = str(payload["start_png_b64"])
            end_b64 = str(payload["end_png_b64"])
            start = _png_to_array(start_b64)
            end = _png_to_array(end_b64)
            frames = backend.interpolate(start, end, str(payload["prompt"]),
                                         int(payload["frame_count"]),
                                         int(payload["seed"]))
            encoded = [_array_to_png(f) for f in frames]
            # Anchoring guard: endpoints echo the request payloads verbatim.
            encoded[0] = start_b64
            encoded[-1] = end_b64
            return 200, {"frames": encoded}

        if path == "/v1/embed_image":
            values = backend.embed_image(_png_to_array(payload["image_png_b64"]))
            return 200, {"values": [float(v) for v in values]}

        if path == "/v1/embed_text":
            values = backend.embed_text(str(payload["text"]))
            return 200, {"values": [float(v) for v in values]}

        if path == "/v1/score":
            score = backend.score(_png_to_array(payload["image_png_b64"]))
            return 200, {"score": float(score)}

        return 404, {"code": "unknown_route", "message": path}
    except (BackendInputError, KeyError, TypeError, ValueError) as exc:
        return 400, {"code": "bad_request", "message": str(exc)}
    except Exception as exc:  # backend crash: report, never hang the route
        return 500, {"code": "backend_error", "message": str(exc)}


class SidecarServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, config: SidecarConfig):
        self.config = config
        self.backends = load_backends(config)  # resolve every model up front
        self.gate = threading.BoundedSemaphore(config.max_concurrent_requests)
        super().__init__((config.host, config.port), _Handler)

    @property
    def port(self) -> int:
        return self.server_address[1]


class _Handler(BaseHTTPRequestHandler):
    server_version = "framebridge-sidecar/0.1"
    protocol_version = "HTTP/1.1"

    def _send(self, status: int, body: dict) -> None:
        data = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        if self.path == "/v1/health":
            self._send(200, {
                "status": "ok",
                "routes": {r: self.server.config.models[r]
                           for r in self.server.config.enabled_routes()},
            })
        else:
            self._send(404, {"code": "unknown_route", "message": self.path})

    def do_POST(self):
        try:
            length = int(self.headers.get("Content-Length", 0))
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            self._send(400, {"code": "bad_request", "message": f"invalid JSON: {exc}"})
            return
        with self.server.gate:
            status, body = handle_request(self.path, payload, self.server.backends)
        self._send(status, body)

    def log_message(self, *args):
        pass


def serve(config: SidecarConfig) -> SidecarServer:
    """Resolve all models and start serving in a background thread.

    Returns the running server; call ``shutdown()`` to stop it. Model
    resolution errors raise here, before any request is accepted.
    """
    server = SidecarServer(config)
    thread = threading.Thread(target=server.serve_forever, daemon=True,
                              name="framebridge-sidecar")
    thread.start()
    return server
