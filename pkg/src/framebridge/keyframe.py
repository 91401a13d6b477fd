"""End-frame synthesis: mask selection, candidate scoring, and argmin pick.

The end frame is chosen by generating N candidates and minimizing a
composite objective with three terms, each normalized into [0, 1]:

    detect  - 1 minus the mean confidence of re-detecting each key label
              in the candidate (a label that vanishes counts 0);
    mask    - mean absolute pixel difference between candidate and source
              inside the union of key masks, divided by 255 (key subjects
              should survive the edit);
    video   - (1 - cosine(text embedding, candidate embedding)) / 2, the
              disagreement between candidate and prompt.

    total = detect + lambda * mask + video

With no key masks the objective degrades gracefully: detect = 1, mask = 0,
and selection runs on the text term alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ProviderError, ValidationError
from .imaging import ImageBuffer
from .model import GenerationRequest, MaskSet, PromptBundle
from .providers.base import Detector, Embedder, ProviderSet, cosine

_TOTAL_RTOL = 1e-12


@dataclass(frozen=True)
class CandidateScore:
    """The three objective terms, their weight, and the combined total."""

    l_detect: float
    l_mask: float
    l_video: float
    lambda_mask: float
    total: float

    def __post_init__(self):
        for name in ("l_detect", "l_mask", "l_video"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")
        if self.lambda_mask < 0:
            raise ValidationError("lambda_mask must be non-negative")
        expected = self.l_detect + self.lambda_mask * self.l_mask + self.l_video
        scale = max(abs(expected), 1.0)
        if abs(self.total - expected) > _TOTAL_RTOL * scale:
            raise ValidationError(
                f"total {self.total} does not equal the combined terms {expected}"
            )

    @classmethod
    def combine(cls, l_detect: float, l_mask: float, l_video: float,
                lambda_mask: float) -> "CandidateScore":
        return cls(
            l_detect=l_detect, l_mask=l_mask, l_video=l_video,
            lambda_mask=lambda_mask,
            total=l_detect + lambda_mask * l_mask + l_video,
        )

    def to_dict(self) -> dict:
        return {
            "l_detect": self.l_detect,
            "l_mask": self.l_mask,
            "l_video": self.l_video,
            "lambda": self.lambda_mask,
            "total": self.total,
        }


@dataclass(frozen=True)
class Candidate:
    """One generated end-frame candidate with its seed and score."""

    seed: int
    image: ImageBuffer
    score: CandidateScore


@dataclass(frozen=True)
class KeyframeResult:
    """Winning end frame plus the full audit trail of candidates."""

    end_frame: ImageBuffer
    score: CandidateScore
    key_masks: MaskSet
    candidates: tuple[Candidate, ...]


def select_key_masks(masks: MaskSet, keywords: list[str] | tuple[str, ...],
                     confidence_floor: float) -> MaskSet:
    """Keep entries whose label matches a keyword (case-insensitive) at or
    above the confidence floor, ordered by confidence descending then label.
    """
    wanted = {k.lower() for k in keywords}
    kept = [e for e in masks.entries
            if e.label.lower() in wanted and e.confidence >= confidence_floor]
    kept.sort(key=lambda e: (-e.confidence, e.label))
    return MaskSet(width=masks.width, height=masks.height, entries=tuple(kept))


def score_candidate(candidate: ImageBuffer, source: ImageBuffer, key_masks: MaskSet,
                    text_prompt: str, lambda_mask: float,
                    embedder: Embedder, detector: Detector) -> CandidateScore:
    """Score one candidate against the composite objective."""
    if candidate.size != source.size:
        raise DimensionMismatchError(
            f"candidate {candidate.size} and source {source.size} differ in size"
        )

    key_labels = sorted({e.label.lower() for e in key_masks.entries})
    if key_labels:
        redetected = detector.detect(candidate, list(key_labels))
        best: dict[str, float] = {}
        for entry in redetected.entries:
            low = entry.label.lower()
            best[low] = max(best.get(low, 0.0), entry.confidence)
        l_detect = 1.0 - float(np.mean([best.get(label, 0.0) for label in key_labels]))
    else:
        l_detect = 1.0

    union = key_masks.union()
    if union.any():
        diff = np.abs(candidate.pixels.astype(np.float64) - source.pixels.astype(np.float64))
        l_mask = float(diff[union].mean()) / 255.0
    else:
        l_mask = 0.0

    text_emb = embedder.embed_text(text_prompt)
    cand_emb = embedder.embed_image(candidate)
    l_video = float(np.clip(1.0 - cosine(text_emb, cand_emb), 0.0, 2.0)) / 2.0

    return CandidateScore.combine(l_detect, l_mask, l_video, lambda_mask)


def pick_best_candidate(candidates: list[Candidate] | tuple[Candidate, ...]) -> Candidate:
    """Argmin of total; ties fall to the lowest seed. Order-independent."""
    if not candidates:
        raise ValidationError("no candidates to pick from")
    return min(candidates, key=lambda c: (c.score.total, c.seed))


def generate_end_frame(request: GenerationRequest, bundle: PromptBundle,
                       providers: ProviderSet, *,
                       confidence_floor: float = 0.25) -> KeyframeResult:
    """Detect key objects, generate N candidates with consecutive seeds, and
    return the candidate minimizing the composite objective.
    """
    detected = providers.detector.detect(request.input_image, list(bundle.keywords))
    key_masks = select_key_masks(detected, bundle.keywords, confidence_floor)

    candidates: list[Candidate] = []
    failures: list[BaseException] = []
    for offset in range(request.candidate_count):
        seed = request.seed + offset
        try:
            image = providers.keyframe.generate_keyframe(
                request.input_image, key_masks, bundle.optimization_prompt, seed
            )
        except ProviderError as exc:
            failures.append(exc)
            continue
        score = score_candidate(
            image, request.input_image, key_masks, bundle.optimization_prompt,
            request.lambda_mask, providers.embedder, providers.detector,
        )
        candidates.append(Candidate(seed=seed, image=image, score=score))

    if not candidates:
        raise ProviderError(
            f"all {request.candidate_count} candidate generations failed: {failures}",
            role="keyframe",
        )
    winner = pick_best_candidate(candidates)
    return KeyframeResult(
        end_frame=winner.image,
        score=winner.score,
        key_masks=key_masks,
        candidates=tuple(candidates),
    )
