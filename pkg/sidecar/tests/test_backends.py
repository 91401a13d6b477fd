import numpy as np
import pytest

from framebridge_sidecar.backends import (
    BackendInputError,
    ColorDetector,
    CrossfadeInterpolator,
    DitherKeyframe,
    GridEmbedder,
    KeywordEnhancer,
    LaplacianSharpness,
    _parse_sections,
)


def gradient(size=16) -> np.ndarray:
    x = np.linspace(0, 255, size).astype(np.uint8)
    px = np.zeros((size, size, 3), dtype=np.uint8)
    px[:, :, 0] = x[None, :]
    px[:, :, 1] = x[:, None]
    px[:, :, 2] = 64
    return px


class TestKeywordEnhancer:
    def test_three_sections(self):
        out = KeywordEnhancer().enhance("a sailboat near the lighthouse", "")
        assert out["keywords"] == ["sailboat", "near", "lighthouse"]
        assert out["frame_state"].startswith("A still frame")
        assert out["optimization_prompt"]

    def test_wordless_text_rejected(self):
        with pytest.raises(BackendInputError):
            KeywordEnhancer().enhance("???", "")


class TestColorDetector:
    def test_finds_its_own_colour(self):
        color = ColorDetector.label_color("boat")
        px = np.zeros((8, 8, 3), dtype=np.uint8)
        px[:, :4, :] = color
        entries = ColorDetector().detect(px, ["boat", "plane"])
        assert len(entries) == 1
        assert entries[0]["label"] == "boat"
        assert entries[0]["confidence"] == 1.0
        assert entries[0]["mask"].shape == (8, 8)

    def test_empty_labels_rejected(self):
        with pytest.raises(BackendInputError):
            ColorDetector().detect(gradient(), [])


class TestDitherKeyframe:
    def test_deterministic_and_mask_preserving(self):
        image = gradient()
        keep = np.zeros((16, 16), dtype=bool)
        keep[:8, :] = True
        gen = DitherKeyframe()
        a = gen.generate(image, [keep], "p", 3)
        b = gen.generate(image, [keep], "p", 3)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(a[keep], image[keep])
        assert np.any(a[~keep] != image[~keep])


class TestCrossfade:
    def test_endpoints_and_midpoint(self):
        start = np.zeros((4, 4, 3), dtype=np.uint8)
        end = np.full((4, 4, 3), 255, dtype=np.uint8)
        frames = CrossfadeInterpolator().interpolate(start, end, "p", 3, 0)
        np.testing.assert_array_equal(frames[0], start)
        np.testing.assert_array_equal(frames[2], end)
        assert np.all(frames[1] == 128)

    def test_frame_count_floor(self):
        img = gradient(4)
        with pytest.raises(BackendInputError):
            CrossfadeInterpolator().interpolate(img, img, "p", 1, 0)


class TestGridEmbedder:
    def test_unit_norm_both_modalities(self):
        emb = GridEmbedder()
        assert np.linalg.norm(emb.embed_image(gradient())) == pytest.approx(1.0, abs=1e-9)
        assert np.linalg.norm(emb.embed_text("a sailboat")) == pytest.approx(1.0, abs=1e-9)
        assert emb.embed_image(gradient()).shape == (64,)
        assert emb.embed_text("a sailboat").shape == (64,)

    def test_black_image_still_embeds(self):
        emb = GridEmbedder()
        values = emb.embed_image(np.zeros((8, 8, 3), dtype=np.uint8))
        assert np.linalg.norm(values) == pytest.approx(1.0, abs=1e-9)


class TestLaplacianSharpness:
    def test_constant_zero_textured_positive(self):
        scorer = LaplacianSharpness()
        assert scorer.score(np.full((8, 8, 3), 100, dtype=np.uint8)) == 0.0
        assert 0.0 < scorer.score(gradient()) <= 1.0


class TestSectionParser:
    def test_parses_any_order(self):
        out = _parse_sections(
            "OPTIMIZATION: waves roll\nKEYWORDS: sea, sky\nFRAME_STATE: calm"
        )
        assert out["keywords"] == ["sea", "sky"]
        assert out["frame_state"] == "calm"
        assert out["optimization_prompt"] == "waves roll"

    def test_missing_section_rejected(self):
        with pytest.raises(BackendInputError):
            _parse_sections("KEYWORDS: sea\nFRAME_STATE: calm")
