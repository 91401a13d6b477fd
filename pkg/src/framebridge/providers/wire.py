"""Wire-format helpers for the HTTP+JSON provider protocol.

One POST route per role:

    /v1/enhance      {text, hint}                          -> {keywords, frame_state, optimization_prompt}
    /v1/detect       {image_png_b64, labels}               -> {entries: [{label, confidence, mask_png_b64}]}
    /v1/keyframe     {image_png_b64, masks, prompt, seed}  -> {image_png_b64}
    /v1/interpolate  {start_png_b64, end_png_b64, prompt,
                      frame_count, seed}                   -> {frames: [png_b64, ...]}
    /v1/embed_image  {image_png_b64}                       -> {values: [...]}
    /v1/embed_text   {text}                                -> {values: [...]}
    /v1/score        {image_png_b64}                       -> {score}

Images travel as base64 PNG (8-bit RGB); masks as base64 single-channel PNG
holding 0/255. Errors are non-2xx with a JSON body {code, message}. Routes
are idempotent, which is what makes blind retries safe.
"""

from __future__ import annotations

import base64

import numpy as np

from ..imaging import ImageBuffer, decode_mask_png, decode_png, encode_mask_png, encode_png
from ..model import MaskEntry, MaskSet

ROUTES = {
    "enhance": "/v1/enhance",
    "detect": "/v1/detect",
    "keyframe": "/v1/keyframe",
    "interpolate": "/v1/interpolate",
    "embed_image": "/v1/embed_image",
    "embed_text": "/v1/embed_text",
    "score": "/v1/score",
    "health": "/v1/health",
}


def image_to_b64(image: ImageBuffer) -> str:
    return base64.b64encode(encode_png(image)).decode("ascii")


def image_from_b64(data: str) -> ImageBuffer:
    return decode_png(base64.b64decode(data))


def mask_to_b64(mask: np.ndarray) -> str:
    return base64.b64encode(encode_mask_png(mask)).decode("ascii")


def mask_from_b64(data: str) -> np.ndarray:
    return decode_mask_png(base64.b64decode(data))


def mask_set_to_wire(masks: MaskSet) -> list[dict]:
    return [
        {"label": e.label, "confidence": e.confidence, "mask_png_b64": mask_to_b64(e.mask)}
        for e in masks.entries
    ]


def mask_set_from_wire(entries: list[dict], width: int, height: int) -> MaskSet:
    decoded = tuple(
        MaskEntry(
            label=item["label"],
            confidence=float(item["confidence"]),
            mask=mask_from_b64(item["mask_png_b64"]),
        )
        for item in entries
    )
    return MaskSet(width=width, height=height, entries=decoded)
