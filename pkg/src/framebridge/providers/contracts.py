"""Role-contract checks that any provider implementation must pass.

These assert only the operation contracts (shapes, ranges, anchoring,
precondition errors), never mock-specific pixel values, so the same suite
runs against in-process mocks, remote adapters, and a live sidecar.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..imaging import ImageBuffer
from .base import ProviderSet


class ContractCheckFailure(AssertionError):
    pass


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise ContractCheckFailure(message)


def _sample_image(width: int = 32, height: int = 32) -> ImageBuffer:
    x = np.linspace(0, 255, width, dtype=np.float64)
    y = np.linspace(0, 255, height, dtype=np.float64)
    px = np.empty((height, width, 3), dtype=np.uint8)
    px[:, :, 0] = x[None, :].astype(np.uint8)
    px[:, :, 1] = y[:, None].astype(np.uint8)
    px[:, :, 2] = 96
    return ImageBuffer(px)


def check_enhancer(providers: ProviderSet) -> None:
    bundle = providers.enhancer.enhance("a sailboat drifting near a lighthouse", "")
    _expect(len(bundle.keywords) >= 1, "enhancer returned no keywords")
    _expect(bool(bundle.frame_state.strip()), "enhancer returned empty frame_state")
    _expect(bool(bundle.optimization_prompt.strip()),
            "enhancer returned empty optimization_prompt")
    try:
        providers.enhancer.enhance("", "")
    except ValidationError:
        pass
    else:
        raise ContractCheckFailure("enhancer accepted empty user_text")


def check_detector(providers: ProviderSet) -> None:
    image = _sample_image()
    masks = providers.detector.detect(image, ["sailboat", "lighthouse"])
    _expect((masks.width, masks.height) == (image.width, image.height),
            "detector mask set does not match image dimensions")
    for entry in masks.entries:
        _expect(0.0 <= entry.confidence <= 1.0,
                f"detector confidence {entry.confidence} outside [0, 1]")
        _expect(entry.mask.shape == (image.height, image.width),
                "detector mask raster does not match image dimensions")
    try:
        providers.detector.detect(image, [])
    except ValidationError:
        pass
    else:
        raise ContractCheckFailure("detector accepted an empty label list")


def check_keyframe(providers: ProviderSet) -> None:
    image = _sample_image()
    masks = providers.detector.detect(image, ["sailboat"])
    out = providers.keyframe.generate_keyframe(image, masks, "a sailboat at sunset", 7)
    _expect(out.size == image.size,
            f"keyframe output is {out.size}, input was {image.size}")
    try:
        providers.keyframe.generate_keyframe(image, masks, "", 7)
    except ValidationError:
        pass
    else:
        raise ContractCheckFailure("keyframe generator accepted an empty prompt")


def check_interpolator(providers: ProviderSet) -> None:
    start = _sample_image()
    end = ImageBuffer(255 - start.pixels)
    for frame_count in (2, 5):
        seq = providers.interpolator.interpolate(start, end, "drift", frame_count, 3)
        _expect(len(seq) == frame_count,
                f"interpolator returned {len(seq)} frames, asked for {frame_count}")
        _expect(seq.frames[0] == start, "interpolator frame 0 does not anchor to start")
        _expect(seq.frames[-1] == end, "interpolator last frame does not anchor to end")
        for i, f in enumerate(seq.frames):
            _expect(f.size == start.size, f"interpolated frame {i} changed size")


def check_embedder(providers: ProviderSet) -> None:
    image_emb = providers.embedder.embed_image(_sample_image())
    text_emb = providers.embedder.embed_text("a sailboat drifting near a lighthouse")
    _expect(abs(float(np.linalg.norm(image_emb.values)) - 1.0) <= 1e-6,
            "image embedding is not unit-norm")
    _expect(abs(float(np.linalg.norm(text_emb.values)) - 1.0) <= 1e-6,
            "text embedding is not unit-norm")
    _expect(image_emb.dimension == text_emb.dimension,
            f"image dim {image_emb.dimension} != text dim {text_emb.dimension}")


def check_scorer(providers: ProviderSet) -> None:
    if providers.scorer is None:
        return
    score = providers.scorer.score_quality(_sample_image())
    _expect(0.0 <= score <= 1.0, f"quality score {score} outside [0, 1]")


ALL_CHECKS = (
    ("enhancer", check_enhancer),
    ("detector", check_detector),
    ("keyframe", check_keyframe),
    ("interpolator", check_interpolator),
    ("embedder", check_embedder),
    ("scorer", check_scorer),
)


def run_contract_suite(providers: ProviderSet) -> list[tuple[str, str]]:
    """Run every check; returns (check_name, failure_message) for each failure."""
    failures = []
    for name, check in ALL_CHECKS:
        try:
            check(providers)
        except ContractCheckFailure as exc:
            failures.append((name, str(exc)))
    return failures
