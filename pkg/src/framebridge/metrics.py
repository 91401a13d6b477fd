"""Numeric video metrics: pixel error, embedding cosines, and SSIM.

All metrics are pure functions over uint8 rasters promoted to float64
(pixel domain 0..255). Embedding-based metrics take an embedder provider so
real and mock embedding spaces are interchangeable.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

from .errors import ConfigError, DimensionMismatchError, ValidationError
from .imaging import FrameSequence, ImageBuffer, luma
from .providers.base import Embedder, Embedding, cosine

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_DYNAMIC_RANGE = 255.0


def mse(a: ImageBuffer, b: ImageBuffer) -> float:
    """Mean squared pixel difference over all H*W*3 samples."""
    if a.size != b.size:
        raise DimensionMismatchError(f"images differ in size: {a.size} vs {b.size}")
    da = a.pixels.astype(np.float64)
    db = b.pixels.astype(np.float64)
    return float(np.mean((da - db) ** 2))


def mse_first(input_image: ImageBuffer, video: FrameSequence) -> float:
    """MSE between the conditioning image and the first generated frame."""
    return mse(input_image, video.frames[0])


def video_mse(generated: FrameSequence, reference: FrameSequence) -> float:
    """Mean per-frame MSE between two equally shaped sequences."""
    if len(generated) != len(reference):
        raise DimensionMismatchError(
            f"sequences differ in length: {len(generated)} vs {len(reference)}"
        )
    return float(np.mean([mse(reference.frames[t], generated.frames[t])
                          for t in range(len(generated))]))


def _frame_embeddings(video: FrameSequence, embedder: Embedder) -> list[Embedding]:
    return [embedder.embed_image(f) for f in video.frames]


def _check_cross_modal(image_emb: Embedding, text_emb: Embedding) -> None:
    if image_emb.dimension != text_emb.dimension:
        raise ConfigError(
            f"image embedding dimension {image_emb.dimension} does not match "
            f"text embedding dimension {text_emb.dimension}"
        )


def clip_image_video(input_image: ImageBuffer, video: FrameSequence,
                     embedder: Embedder) -> float:
    """Mean cosine between the input-image embedding and each frame embedding."""
    ref = embedder.embed_image(input_image)
    return float(np.mean([cosine(ref, e) for e in _frame_embeddings(video, embedder)]))


def clip_text_video(prompt_text: str, video: FrameSequence, embedder: Embedder) -> float:
    """Mean cosine between the prompt embedding and each frame embedding."""
    text_emb = embedder.embed_text(prompt_text)
    frame_embs = _frame_embeddings(video, embedder)
    _check_cross_modal(frame_embs[0], text_emb)
    return float(np.mean([cosine(text_emb, e) for e in frame_embs]))


def clip_temporal(video: FrameSequence, embedder: Embedder) -> float:
    """Mean cosine between embeddings of adjacent frames; needs T >= 2."""
    if len(video) < 2:
        raise ValidationError("temporal consistency needs at least two frames")
    embs = _frame_embeddings(video, embedder)
    return float(np.mean([cosine(embs[t], embs[t + 1]) for t in range(len(embs) - 1)]))


def _mean_paired_cosine(video: FrameSequence, reference: FrameSequence,
                        embedder: Embedder) -> float:
    if len(video) != len(reference):
        raise DimensionMismatchError(
            f"sequences differ in length: {len(video)} vs {len(reference)}"
        )
    gen = _frame_embeddings(video, embedder)
    ref = _frame_embeddings(reference, embedder)
    return float(np.mean([cosine(g, r) for g, r in zip(gen, ref)]))


def clip_corresponding(video: FrameSequence, reference: FrameSequence,
                       embedder: Embedder) -> float:
    """Mean cosine between corresponding generated/reference frame embeddings.

    Reported under the motion dimension. ``clip_refvideo`` reports the same
    computation under the consistency dimension; the report keeps both
    fields distinct rather than inventing divergent formulas.
    """
    return _mean_paired_cosine(video, reference, embedder)


def clip_refvideo(video: FrameSequence, reference: FrameSequence,
                  embedder: Embedder) -> float:
    """Alias of ``clip_corresponding`` reported under the consistency dimension."""
    return _mean_paired_cosine(video, reference, embedder)


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    window = np.outer(g, g)
    return window / window.sum()


def ssim(a: ImageBuffer, b: ImageBuffer) -> float:
    """Mean local SSIM over the luma plane.

    Gaussian 11x11 window (sigma 1.5), k1=0.01, k2=0.03, dynamic range 255,
    valid-mode windows (borders excluded). Images smaller than the window
    fall back to a single uniform window spanning the whole image.
    """
    if a.size != b.size:
        raise DimensionMismatchError(f"images differ in size: {a.size} vs {b.size}")
    la = luma(a)
    lb = luma(b)
    c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_DYNAMIC_RANGE) ** 2

    if min(la.shape) < SSIM_WINDOW:
        mu_a, mu_b = la.mean(), lb.mean()
        var_a, var_b = la.var(), lb.var()
        cov = float(np.mean((la - mu_a) * (lb - mu_b)))
        return float(
            ((2 * mu_a * mu_b + c1) * (2 * cov + c2))
            / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2))
        )

    win = _gaussian_window()
    mu_a = convolve2d(la, win, mode="valid")
    mu_b = convolve2d(lb, win, mode="valid")
    mu_aa = mu_a * mu_a
    mu_bb = mu_b * mu_b
    mu_ab = mu_a * mu_b
    sigma_aa = convolve2d(la * la, win, mode="valid") - mu_aa
    sigma_bb = convolve2d(lb * lb, win, mode="valid") - mu_bb
    sigma_ab = convolve2d(la * lb, win, mode="valid") - mu_ab
    ssim_map = ((2 * mu_ab + c1) * (2 * sigma_ab + c2)) / (
        (mu_aa + mu_bb + c1) * (sigma_aa + sigma_bb + c2)
    )
    return float(ssim_map.mean())


def video_ssim(video: FrameSequence, reference: FrameSequence) -> float:
    """Mean frame-wise SSIM between corresponding frames."""
    if len(video) != len(reference):
        raise DimensionMismatchError(
            f"sequences differ in length: {len(video)} vs {len(reference)}"
        )
    return float(np.mean([ssim(g, r) for g, r in zip(video.frames, reference.frames)]))
