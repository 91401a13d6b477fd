"""Model backends behind the sidecar routes.

The builtin backends are deterministic, dependency-light reference models so
the server is fully functional offline. They are independent implementations
of the documented route semantics (colour-threshold detection, crossfade
interpolation, grid/bag-of-words embeddings, Laplacian sharpness); real model
runtimes plug in via other identifier schemes and must resolve at startup.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import urllib.request

import numpy as np

from .config import SidecarConfig, SidecarConfigError

EMBED_DIM = 64

_WORD_RE = re.compile(r"[A-Za-z0-9']+")

_STOPWORDS = frozenset("""
a an the and or but if then with without of on in at to from by for as is are
was were be been being am do does did done have has had having it its this
that these those there here he she they them his her their you your i we us
our me my
run runs running ran walk walks walking walked jump jumps jumping jumped
move moves moving moved fly flies flying flew swim swims swimming swam go
goes going went come comes coming came drift drifts drifting drifted
""".split())


class BackendInputError(ValueError):
    """The request payload is semantically invalid for this backend."""


def _luma(image: np.ndarray) -> np.ndarray:
    px = image.astype(np.float64)
    return px[:, :, 0] * 0.299 + px[:, :, 1] * 0.587 + px[:, :, 2] * 0.114


def _keystream(context: str, seed: int, nbytes: int) -> np.ndarray:
    out = bytearray()
    counter = 0
    base = f"{context}:{seed}:".encode("utf-8")
    while len(out) < nbytes:
        out.extend(hashlib.sha256(base + str(counter).encode()).digest())
        counter += 1
    return np.frombuffer(bytes(out[:nbytes]), dtype=np.uint8)


class KeywordEnhancer:
    """Stop-word keyword extraction plus fixed prose templates."""

    def enhance(self, text: str, hint: str) -> dict:
        tokens = _WORD_RE.findall(text)
        if not tokens:
            raise BackendInputError("text contains no words")
        keywords, seen = [], set()
        for token in tokens:
            low = token.lower()
            if low in _STOPWORDS or low in seen:
                continue
            seen.add(low)
            keywords.append(token)
        if not keywords:
            keywords = [tokens[0]]
        joined = ", ".join(keywords)
        frame_state = f"A still frame showing {joined}."
        if hint.strip():
            frame_state += f" Context: {hint.strip()}."
        return {
            "keywords": keywords,
            "frame_state": frame_state,
            "optimization_prompt": f"Animate the scene naturally, staying faithful to: {text.strip()}",
        }


class ColorDetector:
    """Segments each label by proximity to its hash-derived colour."""

    def __init__(self, tolerance: int = 8):
        self.tolerance = tolerance

    @staticmethod
    def label_color(label: str) -> tuple[int, int, int]:
        digest = hashlib.sha256(b"mask-color:" + label.lower().encode("utf-8")).digest()
        return digest[0], digest[1], digest[2]

    def detect(self, image: np.ndarray, labels: list[str]) -> list[dict]:
        if not labels:
            raise BackendInputError("label list must be non-empty")
        px = image.astype(np.int16)
        entries = []
        for label in labels:
            color = np.array(self.label_color(label), dtype=np.int16)
            mask = np.all(np.abs(px - color) <= self.tolerance, axis=2)
            if mask.any():
                entries.append({"label": label, "confidence": 1.0, "mask": mask})
        return entries


class DitherKeyframe:
    """Seeded dither outside the mask union; masked pixels pass through."""

    def generate(self, image: np.ndarray, masks: list[np.ndarray],
                 prompt: str, seed: int) -> np.ndarray:
        if not prompt.strip():
            raise BackendInputError("prompt must be non-empty")
        h, w = image.shape[0], image.shape[1]
        stream = _keystream("keyframe", seed, h * w * 3).reshape(h, w, 3)
        delta = stream.astype(np.int16) % 64 - 32
        out = np.clip(image.astype(np.int16) + delta, 0, 255).astype(np.uint8)
        keep = np.zeros((h, w), dtype=bool)
        for mask in masks:
            keep |= mask
        out[keep] = image[keep]
        return out


class CrossfadeInterpolator:
    """Linear blend between the endpoints; ties round half up."""

    def interpolate(self, start: np.ndarray, end: np.ndarray, prompt: str,
                    frame_count: int, seed: int) -> list[np.ndarray]:
        if start.shape != end.shape:
            raise BackendInputError("start and end frames differ in shape")
        if frame_count < 2:
            raise BackendInputError("frame_count must be >= 2")
        a = start.astype(np.float64)
        b = end.astype(np.float64)
        frames = []
        for t in range(frame_count):
            weight = t / (frame_count - 1)
            mixed = (1.0 - weight) * a + weight * b
            frames.append(np.clip(np.floor(mixed + 0.5), 0, 255).astype(np.uint8))
        return frames


class GridEmbedder:
    """8x8 luma grid for images, hashed bag of words for text; shared 64-d space."""

    dimension = EMBED_DIM

    def embed_image(self, image: np.ndarray) -> np.ndarray:
        plane = _luma(image)
        h, w = plane.shape
        cells = np.empty(EMBED_DIM, dtype=np.float64)
        for gy in range(8):
            y0, y1 = (gy * h) // 8, max(((gy + 1) * h) // 8, (gy * h) // 8 + 1)
            for gx in range(8):
                x0, x1 = (gx * w) // 8, max(((gx + 1) * w) // 8, (gx * w) // 8 + 1)
                cells[gy * 8 + gx] = plane[y0:y1, x0:x1].mean()
        return _normalize(cells)

    def embed_text(self, text: str) -> np.ndarray:
        counts = np.zeros(EMBED_DIM, dtype=np.float64)
        for token in re.findall(r"[a-z0-9']+", text.lower()):
            digest = hashlib.sha256(b"text-bucket:" + token.encode("utf-8")).digest()
            counts[int.from_bytes(digest[:8], "big") % EMBED_DIM] += 1.0
        return _normalize(counts)


def _normalize(values: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(values))
    if norm < 1e-12:
        values = np.ones_like(values)
        norm = float(np.linalg.norm(values))
    return values / norm


class LaplacianSharpness:
    """Sharpness proxy: normalized variance of the 4-neighbour Laplacian."""

    _SCALE = float(4 * 255) ** 2

    def score(self, image: np.ndarray) -> float:
        plane = _luma(image)
        h, w = plane.shape
        if h < 3 or w < 3:
            return 0.0
        lap = (
            plane[:-2, 1:-1] + plane[2:, 1:-1] + plane[1:-1, :-2] + plane[1:-1, 2:]
            - 4.0 * plane[1:-1, 1:-1]
        )
        var = float(np.var(lap))
        return var / (var + self._SCALE)


class OpenAIEnhancer:
    """Enhance route backed by an OpenAI-compatible chat-completions API.

    Needs OPENAI_API_KEY (and optionally OPENAI_BASE_URL); the key is checked
    at construction so a missing credential fails at startup.
    """

    _INSTRUCTION = (
        "You prepare inputs for an image-to-video generator. Answer with exactly "
        "three labeled sections:\nKEYWORDS: comma-separated key objects\n"
        "FRAME_STATE: one sentence on the input frame\n"
        "OPTIMIZATION: one sentence on how the scene should evolve\n"
    )

    def __init__(self, model: str):
        self.model = model
        self.api_key = os.environ.get("OPENAI_API_KEY", "")
        self.base_url = os.environ.get("OPENAI_BASE_URL", "https://api.openai.com/v1")
        if not self.api_key:
            raise SidecarConfigError(
                f"openai:{model} needs OPENAI_API_KEY in the environment"
            )

    def enhance(self, text: str, hint: str) -> dict:
        prompt = f"{self._INSTRUCTION}\nRequest: {text}\nImage: {hint}"
        body = json.dumps({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }).encode("utf-8")
        request = urllib.request.Request(
            f"{self.base_url.rstrip('/')}/chat/completions", data=body, method="POST",
            headers={"Content-Type": "application/json",
                     "Authorization": f"Bearer {self.api_key}"},
        )
        with urllib.request.urlopen(request, timeout=60) as resp:
            data = json.loads(resp.read().decode("utf-8"))
        content = data["choices"][0]["message"]["content"]
        return _parse_sections(content)


def _parse_sections(response: str) -> dict:
    sections = {}
    for marker, key in (("KEYWORDS:", "keywords"), ("FRAME_STATE:", "frame_state"),
                        ("OPTIMIZATION:", "optimization_prompt")):
        idx = response.find(marker)
        if idx < 0:
            raise BackendInputError(f"model response missing section {marker!r}")
        rest = response[idx + len(marker):]
        for other, _ in (("KEYWORDS:", ""), ("FRAME_STATE:", ""), ("OPTIMIZATION:", "")):
            if other != marker:
                cut = rest.find(other)
                if cut >= 0:
                    rest = rest[:cut]
        sections[key] = rest.strip()
    keywords = [k.strip() for k in sections["keywords"].split(",") if k.strip()]
    if not keywords:
        raise BackendInputError("model returned no keywords")
    sections["keywords"] = keywords
    return sections


_BUILTINS = {
    ("enhance", "keyword-enhancer"): KeywordEnhancer,
    ("detect", "color-detector"): ColorDetector,
    ("keyframe", "dither-keyframe"): DitherKeyframe,
    ("interpolate", "crossfade"): CrossfadeInterpolator,
    ("embed", "grid-embed"): GridEmbedder,
    ("score", "laplacian-sharpness"): LaplacianSharpness,
}


def resolve_backend(route: str, identifier: str, device: str):
    """Instantiate the backend for one route, or fail with a startup error."""
    scheme, _, name = identifier.partition(":")
    if scheme == "builtin":
        factory = _BUILTINS.get((route, name))
        if factory is None:
            known = sorted(n for (r, n) in _BUILTINS if r == route)
            raise SidecarConfigError(
                f"route {route!r}: no builtin model {name!r} (available: {known})"
            )
        return factory()
    if scheme == "openai":
        if route != "enhance":
            raise SidecarConfigError(
                f"route {route!r}: openai models only serve the enhance route"
            )
        return OpenAIEnhancer(name)
    raise SidecarConfigError(
        f"route {route!r}: unknown model scheme {scheme!r} in {identifier!r}"
    )


def load_backends(config: SidecarConfig) -> dict[str, object]:
    """Resolve every enabled route; any failure aborts startup."""
    return {
        route: resolve_backend(route, identifier, config.device)
        for route, identifier in config.models.items()
    }
