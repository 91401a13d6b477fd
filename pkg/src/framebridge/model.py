"""Domain types exchanged between pipeline stages, and the request digest."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, ValidationError
from .imaging import FrameSequence, ImageBuffer, _frozen

_DIGEST_PREFIX = b"framebridge.request.v1\x00"


@dataclass(frozen=True)
class PromptBundle:
    """The three sub-prompts an enhancement pass distills from user input."""

    keywords: tuple[str, ...]
    frame_state: str
    optimization_prompt: str
    raw_user_text: str = ""

    def __post_init__(self):
        kws = tuple(self.keywords)
        if not kws:
            raise ValidationError("keywords must be a non-empty list")
        for kw in kws:
            if not kw.strip():
                raise ValidationError("keywords must be non-empty after trimming")
        if not self.frame_state.strip():
            raise ValidationError("frame_state must be non-empty")
        if not self.optimization_prompt.strip():
            raise ValidationError("optimization_prompt must be non-empty")
        object.__setattr__(self, "keywords", kws)

    def to_dict(self) -> dict:
        return {
            "keywords": list(self.keywords),
            "frame_state": self.frame_state,
            "optimization_prompt": self.optimization_prompt,
            "raw_user_text": self.raw_user_text,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PromptBundle":
        return cls(
            keywords=tuple(data["keywords"]),
            frame_state=data["frame_state"],
            optimization_prompt=data["optimization_prompt"],
            raw_user_text=data.get("raw_user_text", ""),
        )


@dataclass(frozen=True)
class MaskEntry:
    """One labeled binary mask with a detection confidence."""

    label: str
    confidence: float
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.label:
            raise ValidationError("mask label must be non-empty")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")
        m = np.asarray(self.mask)
        if m.ndim != 2:
            raise ValidationError(f"mask must be 2-D, got shape {m.shape}")
        object.__setattr__(self, "mask", _frozen(m.astype(bool)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MaskEntry):
            return NotImplemented
        return (
            self.label == other.label
            and self.confidence == other.confidence
            and self.mask.shape == other.mask.shape
            and np.array_equal(self.mask, other.mask)
        )

    def __hash__(self):
        return hash((self.label, self.confidence, self.mask.shape))


@dataclass(frozen=True)
class MaskSet:
    """Labeled masks from open-set detection over one source image."""

    width: int
    height: int
    entries: tuple[MaskEntry, ...] = ()

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError("mask set dimensions must be >= 1")
        entries = tuple(self.entries)
        for e in entries:
            if e.mask.shape != (self.height, self.width):
                raise DimensionMismatchError(
                    f"mask for {e.label!r} is {e.mask.shape}, "
                    f"expected {(self.height, self.width)}"
                )
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.entries)

    def union(self) -> np.ndarray:
        """Boolean union of all member masks (all-False when empty)."""
        out = np.zeros((self.height, self.width), dtype=bool)
        for e in self.entries:
            out |= e.mask
        return out


@dataclass(frozen=True)
class GenerationRequest:
    """Everything a single video generation run depends on."""

    input_image: ImageBuffer
    user_text: str
    frame_count: int = 16
    seed: int = 0
    lambda_mask: float = 0.5
    candidate_count: int = 4

    def __post_init__(self):
        if self.frame_count < 2:
            raise ValidationError("frame_count must be >= 2 (start and end frame)")
        if self.candidate_count < 1:
            raise ValidationError("candidate_count must be >= 1")
        if not (0 <= self.seed < 2 ** 64):
            raise ValidationError("seed must fit in an unsigned 64-bit integer")
        if self.lambda_mask < 0:
            raise ValidationError("lambda_mask must be non-negative")


def content_digest(request: GenerationRequest) -> str:
    """Deterministic SHA-256 hex digest of a request.

    The byte layout is fixed (versioned prefix, big-endian fixed-width
    fields, length-prefixed text, raw pixel bytes) so digests are stable
    across processes and platforms.
    """
    h = hashlib.sha256()
    h.update(_DIGEST_PREFIX)
    img = request.input_image
    h.update(struct.pack(">II", img.width, img.height))
    h.update(img.tobytes())
    text = request.user_text.encode("utf-8")
    h.update(struct.pack(">I", len(text)))
    h.update(text)
    h.update(struct.pack(">I", request.frame_count))
    h.update(struct.pack(">Q", request.seed))
    h.update(struct.pack(">d", request.lambda_mask))
    h.update(struct.pack(">I", request.candidate_count))
    return h.hexdigest()


@dataclass(frozen=True)
class StageRecord:
    """Provenance for one pipeline stage."""

    stage: str
    provider_id: str
    sequence: int
    started_at: float | None = None
    duration_ms: float | None = None

    def to_dict(self) -> dict:
        out = {"stage": self.stage, "provider_id": self.provider_id, "sequence": self.sequence}
        if self.started_at is not None:
            out["started_at"] = self.started_at
        if self.duration_ms is not None:
            out["duration_ms"] = self.duration_ms
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "StageRecord":
        return cls(
            stage=data["stage"],
            provider_id=data["provider_id"],
            sequence=data["sequence"],
            started_at=data.get("started_at"),
            duration_ms=data.get("duration_ms"),
        )


@dataclass(frozen=True)
class GenerationArtifact:
    """The persisted outcome of one pipeline run."""

    request_digest: str
    prompt_bundle: PromptBundle
    mask_set: MaskSet
    end_frame: ImageBuffer
    video: FrameSequence
    provenance: tuple[StageRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @classmethod
    def build(cls, request: GenerationRequest, *, prompt_bundle: PromptBundle,
              mask_set: MaskSet, end_frame: ImageBuffer, video: FrameSequence,
              provenance: tuple[StageRecord, ...] = ()) -> "GenerationArtifact":
        """Construct and enforce the start-frame anchor and length contract."""
        if len(video) != request.frame_count:
            raise ValidationError(
                f"video has {len(video)} frames, request asked for {request.frame_count}"
            )
        if video.frames[0] != request.input_image:
            raise ValidationError("video must start with the request input image")
        return cls(
            request_digest=content_digest(request),
            prompt_bundle=prompt_bundle,
            mask_set=mask_set,
            end_frame=end_frame,
            video=video,
            provenance=provenance,
        )
