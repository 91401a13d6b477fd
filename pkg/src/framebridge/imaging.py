"""Dense RGB rasters, frame sequences and the raster operations every stage shares.

Pixel domain is unsigned 8-bit [0, 255] throughout; metric math promotes to
float64. All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image as _PILImage

from .errors import DimensionMismatchError, ValidationError

#: BT.601 luma weights used wherever a single grayscale channel is needed.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

#: Default working resolution; inputs are normalized to this on ingest.
DEFAULT_RESOLUTION = 256


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ImageBuffer:
    """An RGB image: height x width x 3 uint8 samples, row-major."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValidationError(f"expected (h, w, 3) pixel array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValidationError("image dimensions must be >= 1")
        if px.dtype != np.uint8:
            raise ValidationError(f"pixels must be uint8, got {px.dtype}")
        object.__setattr__(self, "pixels", _frozen(px))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def size(self) -> tuple[int, int]:
        """(width, height)."""
        return self.width, self.height

    def tobytes(self) -> bytes:
        """Row-major RGB sample bytes, length width*height*3."""
        return self.pixels.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(
            self.pixels, other.pixels
        )

    def __hash__(self):
        return hash((self.pixels.shape, self.tobytes()))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageBuffer":
        """Build from any integer array in [0, 255], copying into uint8."""
        a = np.asarray(arr)
        if np.issubdtype(a.dtype, np.floating):
            raise ValidationError("use round_to_u8 for float arrays")
        if a.min(initial=0) < 0 or a.max(initial=0) > 255:
            raise ValidationError("samples out of the [0, 255] range")
        return cls(a.astype(np.uint8))

    @classmethod
    def full(cls, width: int, height: int, rgb: tuple[int, int, int]) -> "ImageBuffer":
        """Constant-colour image."""
        return cls(np.full((height, width, 3), rgb, dtype=np.uint8))


@dataclass(frozen=True)
class FrameSequence:
    """An ordered run of same-sized frames plus timing metadata."""

    frames: tuple[ImageBuffer, ...]
    frames_per_second: float

    def __post_init__(self):
        frames = tuple(self.frames)
        if len(frames) < 1:
            raise ValidationError("a frame sequence needs at least one frame")
        w, h = frames[0].size
        for i, f in enumerate(frames):
            if f.size != (w, h):
                raise DimensionMismatchError(
                    f"frame {i} is {f.size}, expected {(w, h)}"
                )
        if not (self.frames_per_second > 0):
            raise ValidationError("frames_per_second must be positive")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height


def round_to_u8(values: np.ndarray) -> np.ndarray:
    """Round half up and clamp into uint8.

    numpy's round() rounds half to even; blends fix ties upward instead so
    that e.g. the midpoint of 0 and 255 lands on 128 everywhere.
    """
    return np.clip(np.floor(np.asarray(values, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


def luma(image: ImageBuffer) -> np.ndarray:
    """BT.601 luma plane as float64, shape (h, w)."""
    px = image.pixels.astype(np.float64)
    r, g, b = LUMA_WEIGHTS
    return px[:, :, 0] * r + px[:, :, 1] * g + px[:, :, 2] * b


def resize_bilinear(image: ImageBuffer, width: int, height: int) -> ImageBuffer:
    """Resize with bilinear interpolation and half-pixel center alignment.

    Identity when the target equals the source size. Sample coordinates are
    (i + 0.5) * src/dst - 0.5 with edge clamping; results round half up.
    """
    if width < 1 or height < 1:
        raise ValidationError("target dimensions must be >= 1")
    if (width, height) == image.size:
        return image

    src = image.pixels.astype(np.float64)
    sh, sw = src.shape[0], src.shape[1]

    def axis_coords(dst: int, length: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = (np.arange(dst, dtype=np.float64) + 0.5) * length / dst - 0.5
        x0 = np.floor(x)
        t = x - x0
        i0 = np.clip(x0, 0, length - 1).astype(np.intp)
        i1 = np.clip(x0 + 1, 0, length - 1).astype(np.intp)
        return i0, i1, t

    y0, y1, ty = axis_coords(height, sh)
    x0, x1, tx = axis_coords(width, sw)

    top = src[y0][:, x0] * (1 - tx)[None, :, None] + src[y0][:, x1] * tx[None, :, None]
    bot = src[y1][:, x0] * (1 - tx)[None, :, None] + src[y1][:, x1] * tx[None, :, None]
    out = top * (1 - ty)[:, None, None] + bot * ty[:, None, None]
    return ImageBuffer(round_to_u8(out))


def center_crop_square(image: ImageBuffer) -> ImageBuffer:
    """Crop to the largest centered square (short side)."""
    h, w = image.height, image.width
    side = min(h, w)
    top = (h - side) // 2
    left = (w - side) // 2
    return ImageBuffer(np.ascontiguousarray(image.pixels[top:top + side, left:left + side]))


def normalize_ingest(image: ImageBuffer, resolution: int = DEFAULT_RESOLUTION) -> ImageBuffer:
    """Center-crop to square, then resize to the working resolution."""
    return resize_bilinear(center_crop_square(image), resolution, resolution)


# --- PNG codec -------------------------------------------------------------
# Frames are 8-bit RGB PNG; masks are single-channel PNG holding 0/255.

def encode_png(image: ImageBuffer) -> bytes:
    buf = io.BytesIO()
    _PILImage.fromarray(image.pixels, mode="RGB").save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def decode_png(data: bytes) -> ImageBuffer:
    """Decode a PNG into RGB, discarding any alpha channel."""
    with _PILImage.open(io.BytesIO(data)) as im:
        rgb = im.convert("RGB")
        return ImageBuffer(np.asarray(rgb, dtype=np.uint8))


def encode_mask_png(mask: np.ndarray) -> bytes:
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValidationError(f"mask must be 2-D, got shape {m.shape}")
    plane = np.where(m.astype(bool), 255, 0).astype(np.uint8)
    buf = io.BytesIO()
    _PILImage.fromarray(plane, mode="L").save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def decode_mask_png(data: bytes) -> np.ndarray:
    with _PILImage.open(io.BytesIO(data)) as im:
        plane = np.asarray(im.convert("L"), dtype=np.uint8)
    return plane >= 128


def load_image(path) -> ImageBuffer:
    with open(path, "rb") as fh:
        return decode_png(fh.read())


def save_image(image: ImageBuffer, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_png(image))
