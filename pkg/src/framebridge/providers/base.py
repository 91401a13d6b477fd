"""Provider roles, endpoint/retry configuration, and the embedding type.

Five roles fill the pipeline (enhancer, detector, keyframe, interpolator,
embedder) plus an optional quality scorer. Each role is a small protocol; a
concrete provider is either an in-process mock or a remote adapter speaking
the wire protocol. Adapters are stateless per call and must tolerate
concurrent in-flight requests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from ..errors import ValidationError
from ..imaging import FrameSequence, ImageBuffer
from ..model import MaskSet, PromptBundle

ROLES = ("enhancer", "detector", "keyframe", "interpolator", "embedder", "scorer")

EMBEDDING_NORM_TOL = 1e-6


@dataclass(frozen=True)
class ProviderEndpoint:
    """Where one provider role lives and how patiently to talk to it."""

    role: str
    base_url: str
    timeout_ms: int = 30_000
    max_retries: int = 2
    backoff_base_ms: int = 250

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValidationError(f"unknown provider role {self.role!r}")
        if self.timeout_ms <= 0:
            raise ValidationError("timeout_ms must be > 0")
        if self.max_retries < 0:
            raise ValidationError("max_retries must be >= 0")
        if self.backoff_base_ms < 0:
            raise ValidationError("backoff_base_ms must be >= 0")


@dataclass(frozen=True)
class Embedding:
    """A real vector in a provider's shared image/text space."""

    values: np.ndarray = field(repr=False)
    normalized: bool = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise ValidationError("embedding must be a non-empty 1-D vector")
        if self.normalized:
            norm = float(np.linalg.norm(v))
            if abs(norm - 1.0) > EMBEDDING_NORM_TOL:
                raise ValidationError(f"normalized embedding has L2 norm {norm}")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dimension(self) -> int:
        return int(self.values.size)


def l2_normalize(values: np.ndarray, *, fallback_uniform: bool = True) -> np.ndarray:
    """Scale to unit L2 norm; a zero vector becomes the uniform direction."""
    v = np.asarray(values, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm < 1e-12:
        if not fallback_uniform:
            raise ValidationError("cannot normalize a zero vector")
        v = np.ones_like(v)
        norm = float(np.linalg.norm(v))
    return v / norm


def cosine(a: Embedding, b: Embedding) -> float:
    """Cosine similarity; zero-norm operands yield 0.0."""
    den = float(np.linalg.norm(a.values) * np.linalg.norm(b.values))
    if den == 0.0:
        return 0.0
    return float(np.dot(a.values, b.values) / den)


@runtime_checkable
class Enhancer(Protocol):
    provider_id: str

    def enhance(self, user_text: str, image_caption_hint: str = "") -> PromptBundle: ...


@runtime_checkable
class Detector(Protocol):
    provider_id: str

    def detect(self, image: ImageBuffer, labels: list[str]) -> MaskSet: ...


@runtime_checkable
class KeyframeGenerator(Protocol):
    provider_id: str

    def generate_keyframe(self, image: ImageBuffer, masks: MaskSet,
                          prompt: str, seed: int) -> ImageBuffer: ...


@runtime_checkable
class Interpolator(Protocol):
    provider_id: str

    def interpolate(self, start: ImageBuffer, end: ImageBuffer, prompt: str,
                    frame_count: int, seed: int) -> FrameSequence: ...


@runtime_checkable
class Embedder(Protocol):
    provider_id: str

    def embed_image(self, image: ImageBuffer) -> Embedding: ...

    def embed_text(self, text: str) -> Embedding: ...


@runtime_checkable
class QualityScorer(Protocol):
    provider_id: str

    def score_quality(self, frame: ImageBuffer) -> float: ...


@dataclass(frozen=True)
class ProviderSet:
    """One provider per role; the scorer is optional."""

    enhancer: Enhancer
    detector: Detector
    keyframe: KeyframeGenerator
    interpolator: Interpolator
    embedder: Embedder
    scorer: QualityScorer | None = None

    def identities(self) -> dict[str, str]:
        out = {
            "enhancer": self.enhancer.provider_id,
            "detector": self.detector.provider_id,
            "keyframe": self.keyframe.provider_id,
            "interpolator": self.interpolator.provider_id,
            "embedder": self.embedder.provider_id,
        }
        if self.scorer is not None:
            out["scorer"] = self.scorer.provider_id
        return out
