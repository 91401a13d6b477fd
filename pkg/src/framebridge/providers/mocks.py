"""Deterministic in-process providers.

Every mock is a pure function of its inputs and seed: randomness comes from a
SHA-256 counter-mode keystream, never from global RNG state, so outputs are
bit-stable across processes, platforms and library versions. Golden files
recorded against these mocks stay valid anywhere.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

from ..errors import DimensionMismatchError, ValidationError
from ..imaging import FrameSequence, ImageBuffer, luma, round_to_u8
from ..model import MaskEntry, MaskSet, PromptBundle
from .base import Embedding, l2_normalize

MOCK_EMBED_DIM = 64
MOCK_FPS = 8.0

# Articles, prepositions, pronouns, auxiliaries and common motion verbs.
# A real enhancer does semantic extraction; the mock only needs a stable,
# plausible keyword split.
STOPWORDS = frozenset("""
a an the and or but if then with without of on in at to from by for as is are
was were be been being am do does did done have has had having it its this
that these those there here he she they them his her their you your i we us
our me my mine myself itself themselves into onto over under above below
between through during
run runs running ran walk walks walking walked jump jumps jumping jumped
move moves moving moved fly flies flying flew swim swims swimming swam go
goes going went come comes coming came stand stands standing stood sit sits
sitting sat look looks looking looked make makes making made
""".split())

_WORD_RE = re.compile(r"[A-Za-z0-9']+")


def _keystream(context: str, seed: int, nbytes: int) -> np.ndarray:
    """Deterministic uint8 stream derived from (context, seed) via SHA-256 counter mode."""
    out = bytearray()
    counter = 0
    base = f"{context}:{seed}:".encode("utf-8")
    while len(out) < nbytes:
        out.extend(hashlib.sha256(base + str(counter).encode()).digest())
        counter += 1
    return np.frombuffer(bytes(out[:nbytes]), dtype=np.uint8)


def label_color(label: str) -> tuple[int, int, int]:
    """The RGB colour the mock detector associates with a label."""
    digest = hashlib.sha256(b"mask-color:" + label.lower().encode("utf-8")).digest()
    return digest[0], digest[1], digest[2]


class MockEnhancer:
    """Keyword extraction by stop-word filtering plus fixed prose templates."""

    provider_id = "mock:enhancer"

    def enhance(self, user_text: str, image_caption_hint: str = "") -> PromptBundle:
        if not user_text.strip():
            raise ValidationError("user_text must be non-empty")
        tokens = _WORD_RE.findall(user_text)
        if not tokens:
            raise ValidationError("user_text contains no words")
        keywords: list[str] = []
        seen: set[str] = set()
        for token in tokens:
            lower = token.lower()
            if lower in STOPWORDS or lower in seen:
                continue
            seen.add(lower)
            keywords.append(token)
        if not keywords:
            # All stopwords: fall back to the first token so the bundle stays valid.
            keywords = [tokens[0]]
        joined = ", ".join(keywords)
        frame_state = f"A still frame showing {joined}."
        if image_caption_hint.strip():
            frame_state += f" Context: {image_caption_hint.strip()}."
        optimization = f"Animate the scene naturally, staying faithful to: {user_text.strip()}"
        return PromptBundle(
            keywords=tuple(keywords),
            frame_state=frame_state,
            optimization_prompt=optimization,
            raw_user_text=user_text,
        )


class MockDetector:
    """Per-label colour-threshold segmentation.

    A label matches pixels within +/- tolerance of its ``label_color``;
    any match yields one full-confidence entry, no match yields none.
    """

    provider_id = "mock:detector"

    def __init__(self, tolerance: int = 8, max_entries_per_label: int = 4):
        self.tolerance = tolerance
        self.max_entries_per_label = max_entries_per_label

    def detect(self, image: ImageBuffer, labels: list[str]) -> MaskSet:
        if not labels:
            raise ValidationError("label list must be non-empty")
        px = image.pixels.astype(np.int16)
        entries = []
        for label in labels:
            color = np.array(label_color(label), dtype=np.int16)
            mask = np.all(np.abs(px - color) <= self.tolerance, axis=2)
            if mask.any():
                entries.append(MaskEntry(label=label, confidence=1.0, mask=mask))
        return MaskSet(width=image.width, height=image.height, entries=tuple(entries))


class MockKeyframeGenerator:
    """Seeded perturbation of the source outside the mask union.

    Pixels covered by any mask are passed through untouched (the key
    subjects survive); everything else gets a deterministic +/-32 dither.
    """

    provider_id = "mock:keyframe"

    def generate_keyframe(self, image: ImageBuffer, masks: MaskSet,
                          prompt: str, seed: int) -> ImageBuffer:
        if not prompt.strip():
            raise ValidationError("prompt must be non-empty")
        h, w = image.height, image.width
        stream = _keystream("keyframe", seed, h * w * 3).reshape(h, w, 3)
        delta = stream.astype(np.int16) % 64 - 32
        out = np.clip(image.pixels.astype(np.int16) + delta, 0, 255).astype(np.uint8)
        keep = masks.union()
        out[keep] = image.pixels[keep]
        return ImageBuffer(out)


class MockInterpolator:
    """Linear crossfade between the two endpoint frames.

    Frame t blends with weight t/(T-1); ties round half up, so the midpoint
    of 0 and 255 is 128. Endpoints reproduce the inputs exactly.
    """

    provider_id = "mock:interpolator"

    def __init__(self, fps: float = MOCK_FPS):
        self.fps = fps

    def interpolate(self, start: ImageBuffer, end: ImageBuffer, prompt: str,
                    frame_count: int, seed: int) -> FrameSequence:
        if start.size != end.size:
            raise DimensionMismatchError(
                f"start {start.size} and end {end.size} frames differ in size"
            )
        if frame_count < 2:
            raise ValidationError("frame_count must be >= 2")
        a = start.pixels.astype(np.float64)
        b = end.pixels.astype(np.float64)
        frames = []
        for t in range(frame_count):
            weight = t / (frame_count - 1)
            frames.append(ImageBuffer(round_to_u8((1.0 - weight) * a + weight * b)))
        return FrameSequence(frames=tuple(frames), frames_per_second=self.fps)


class MockEmbedder:
    """Image and text embeddings into one 64-dimensional space.

    Images: BT.601 luma, block-averaged onto an 8x8 grid, flattened row-major
    and L2-normalized. Text: bag of words hashed into 64 buckets, then
    L2-normalized. Zero vectors (e.g. an all-black image) fall back to the
    uniform direction before normalization so identical inputs always give
    cosine 1.0.
    """

    provider_id = "mock:embedder"
    dimension = MOCK_EMBED_DIM

    def embed_image(self, image: ImageBuffer) -> Embedding:
        cells = image_grid_cells(image)
        return Embedding(values=l2_normalize(cells), normalized=True)

    def embed_text(self, text: str) -> Embedding:
        counts = text_bucket_counts(text)
        return Embedding(values=l2_normalize(counts), normalized=True)


def image_grid_cells(image: ImageBuffer, grid: int = 8) -> np.ndarray:
    """Mean luma per cell of a grid x grid partition, flattened row-major."""
    plane = luma(image)
    h, w = plane.shape
    cells = np.empty(grid * grid, dtype=np.float64)
    for gy in range(grid):
        y0, y1 = (gy * h) // grid, ((gy + 1) * h) // grid
        y1 = max(y1, y0 + 1)
        for gx in range(grid):
            x0, x1 = (gx * w) // grid, ((gx + 1) * w) // grid
            x1 = max(x1, x0 + 1)
            cells[gy * grid + gx] = plane[y0:y1, x0:x1].mean()
    return cells


def text_bucket_counts(text: str, dim: int = MOCK_EMBED_DIM) -> np.ndarray:
    """Hash-bucketed bag-of-words counts; hashing is salted SHA-256, not hash()."""
    counts = np.zeros(dim, dtype=np.float64)
    for token in re.findall(r"[a-z0-9']+", text.lower()):
        digest = hashlib.sha256(b"text-bucket:" + token.encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:8], "big") % dim
        counts[bucket] += 1.0
    return counts


class MockQualityScorer:
    """Sharpness proxy: variance of the 4-neighbour Laplacian over the luma plane.

    Normalized as var / (var + 1020^2) where 1020 = 4*255 bounds a single
    response, so constant images score 0.0 and the map is strictly monotone.
    Images smaller than 3x3 have no interior and score 0.0.
    """

    provider_id = "mock:scorer"

    _SCALE = float(4 * 255) ** 2

    def score_quality(self, frame: ImageBuffer) -> float:
        plane = luma(frame)
        h, w = plane.shape
        if h < 3 or w < 3:
            return 0.0
        lap = (
            plane[:-2, 1:-1] + plane[2:, 1:-1] + plane[1:-1, :-2] + plane[1:-1, 2:]
            - 4.0 * plane[1:-1, 1:-1]
        )
        var = float(np.var(lap))
        return var / (var + self._SCALE)


def mock_provider_set(*, with_scorer: bool = True, fps: float = MOCK_FPS):
    """The standard all-mock provider wiring used by tests and demos."""
    from .base import ProviderSet

    return ProviderSet(
        enhancer=MockEnhancer(),
        detector=MockDetector(),
        keyframe=MockKeyframeGenerator(),
        interpolator=MockInterpolator(fps=fps),
        embedder=MockEmbedder(),
        scorer=MockQualityScorer() if with_scorer else None,
    )
