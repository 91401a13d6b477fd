"""Bracketed video synthesis and reference-based sequence error."""

from __future__ import annotations

from .errors import ContractViolationError, DimensionMismatchError, ValidationError
from .imaging import FrameSequence, ImageBuffer
from .metrics import video_mse
from .model import PromptBundle
from .providers.base import Interpolator


def synthesize(start: ImageBuffer, end: ImageBuffer, bundle: PromptBundle,
               frame_count: int, seed: int, provider: Interpolator) -> FrameSequence:
    """Interpolate between the two keyframes under the optimization prompt.

    The provider's output is validated, not trusted: exactly ``frame_count``
    frames, and the first/last frames must reproduce the inputs byte-exactly.
    Providers that re-encode endpoints lossily fail here.
    """
    if start.size != end.size:
        raise DimensionMismatchError(
            f"start {start.size} and end {end.size} frames differ in size"
        )
    if frame_count < 2:
        raise ValidationError("frame_count must be >= 2")

    video = provider.interpolate(start, end, bundle.optimization_prompt, frame_count, seed)

    if len(video) != frame_count:
        raise ContractViolationError(
            f"interpolator returned {len(video)} frames, contract requires {frame_count}"
        )
    if video.frames[0] != start:
        raise ContractViolationError(
            "frame 0 is not pixel-identical to the start keyframe", frame_index=0
        )
    if video.frames[-1] != end:
        raise ContractViolationError(
            f"frame {frame_count - 1} is not pixel-identical to the end keyframe",
            frame_index=frame_count - 1,
        )
    return video


def eval_against_reference(generated: FrameSequence, reference: FrameSequence) -> float:
    """Mean per-frame MSE against a ground-truth sequence (0 iff identical)."""
    return video_mse(generated, reference)
