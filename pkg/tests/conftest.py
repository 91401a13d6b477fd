import numpy as np
import pytest

from framebridge.imaging import ImageBuffer, FrameSequence
from framebridge.providers.mocks import mock_provider_set


@pytest.fixture
def providers():
    return mock_provider_set()


@pytest.fixture
def gradient_image():
    """32x32 image with horizontal red and vertical green ramps."""
    x = np.linspace(0, 255, 32)
    y = np.linspace(0, 255, 32)
    px = np.empty((32, 32, 3), dtype=np.uint8)
    px[:, :, 0] = x[None, :].astype(np.uint8)
    px[:, :, 1] = y[:, None].astype(np.uint8)
    px[:, :, 2] = 96
    return ImageBuffer(px)


@pytest.fixture
def left_bright_image():
    px = np.zeros((16, 16, 3), dtype=np.uint8)
    px[:, :8, :] = 220
    return ImageBuffer(px)


@pytest.fixture
def right_bright_image():
    px = np.zeros((16, 16, 3), dtype=np.uint8)
    px[:, 8:, :] = 220
    return ImageBuffer(px)


def rng_image(rng: np.random.Generator, width: int, height: int) -> ImageBuffer:
    return ImageBuffer(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def constant_video(image: ImageBuffer, frames: int, fps: float = 8.0) -> FrameSequence:
    return FrameSequence(frames=tuple([image] * frames), frames_per_second=fps)
