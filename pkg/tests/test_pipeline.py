import json
from pathlib import Path

import numpy as np
import pytest

from framebridge.artifacts import write_frame_dir
from framebridge.errors import StageError, ValidationError
from framebridge.imaging import ImageBuffer, save_image
from framebridge.model import GenerationRequest, content_digest
from framebridge.pipeline import (
    PipelineConfig,
    STAGE_KEYFRAME,
    evaluate,
    evaluate_entry,
    load_config,
    load_manifest,
    run,
)
from framebridge.providers.base import ProviderEndpoint, ProviderSet
from framebridge.providers.mocks import (
    MockInterpolator,
    mock_provider_set,
)
from framebridge.providers.remote import RemoteDetector, TransportError

from conftest import rng_image


class CountingProxy:
    """Wraps a provider object and counts every operation call."""

    def __init__(self, inner, counter):
        self._inner = inner
        self._counter = counter
        self.provider_id = inner.provider_id

    def __getattr__(self, name):
        attr = getattr(self._inner, name)
        if callable(attr):
            def wrapped(*args, **kwargs):
                self._counter[name] = self._counter.get(name, 0) + 1
                return attr(*args, **kwargs)
            return wrapped
        return attr


def counting_provider_set(counter) -> ProviderSet:
    mocks = mock_provider_set()
    return ProviderSet(
        enhancer=CountingProxy(mocks.enhancer, counter),
        detector=CountingProxy(mocks.detector, counter),
        keyframe=CountingProxy(mocks.keyframe, counter),
        interpolator=CountingProxy(mocks.interpolator, counter),
        embedder=CountingProxy(mocks.embedder, counter),
        scorer=CountingProxy(mocks.scorer, counter),
    )


def small_config(tmp_path, providers=None, **overrides) -> PipelineConfig:
    defaults = dict(
        providers=providers if providers is not None else mock_provider_set(),
        artifact_root=tmp_path / "artifacts",
        frame_count=4,
        candidate_count=2,
        resolution=16,
    )
    defaults.update(overrides)
    return PipelineConfig(**defaults)


def small_request(image=None, **overrides) -> GenerationRequest:
    if image is None:
        image = ImageBuffer.full(16, 16, (120, 90, 60))
    defaults = dict(input_image=image, user_text="a dog runs on the beach",
                    frame_count=4, seed=3, lambda_mask=0.5, candidate_count=2)
    defaults.update(overrides)
    return GenerationRequest(**defaults)


def dir_bytes(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


class TestRun:
    def test_full_mock_run_produces_anchored_artifact(self, tmp_path):
        config = small_config(tmp_path)
        request = small_request()
        artifact = run(request, config)
        assert len(artifact.video) == request.frame_count
        assert artifact.video.frames[0] == request.input_image
        assert artifact.video.frames[-1] == artifact.end_frame
        out_dir = config.artifact_root / content_digest(request)
        assert (out_dir / "manifest.json").exists()
        assert (out_dir / "frames" / "frame_00000.png").exists()
        assert (out_dir / "candidates" / "scores.json").exists()

    def test_second_run_hits_cache_with_zero_provider_calls(self, tmp_path):
        counter = {}
        config = small_config(tmp_path, providers=counting_provider_set(counter))
        request = small_request()
        first = run(request, config)
        calls_after_first = dict(counter)
        assert calls_after_first  # the first run did call providers
        second = run(request, config)
        assert counter == calls_after_first
        assert second.request_digest == first.request_digest
        assert second.video.frames == first.video.frames
        assert second.end_frame == first.end_frame
        assert second.prompt_bundle == first.prompt_bundle

    def test_cache_disabled_recomputes(self, tmp_path):
        counter = {}
        config = small_config(tmp_path, providers=counting_provider_set(counter),
                              cache_enabled=False)
        request = small_request()
        run(request, config)
        calls_after_first = dict(counter)
        run(request, config)
        assert counter["enhance"] == 2 * calls_after_first["enhance"]

    def test_cached_artifact_equals_fresh_one(self, tmp_path):
        config_a = small_config(tmp_path / "a")
        config_b = small_config(tmp_path / "b", cache_enabled=False)
        request = small_request()
        cached = run(request, config_a)
        again = run(request, config_a)   # cache hit
        fresh = run(request, config_b)
        for artifact in (again, fresh):
            assert artifact.video.frames == cached.video.frames
            assert artifact.end_frame == cached.end_frame
            assert artifact.mask_set == cached.mask_set
            assert artifact.prompt_bundle == cached.prompt_bundle

    def test_detector_down_names_keyframe_stage(self, tmp_path):
        class DeadTransport:
            def post(self, url, payload, *, timeout_s, headers):
                raise TransportError("connection refused")

        mocks = mock_provider_set()
        endpoint = ProviderEndpoint(role="detector", base_url="http://dead.test",
                                    timeout_ms=100, max_retries=1, backoff_base_ms=1)
        providers = ProviderSet(
            enhancer=mocks.enhancer,
            detector=RemoteDetector(endpoint, transport=DeadTransport(),
                                    sleep=lambda s: None),
            keyframe=mocks.keyframe,
            interpolator=mocks.interpolator,
            embedder=mocks.embedder,
            scorer=mocks.scorer,
        )
        config = small_config(tmp_path, providers=providers)
        with pytest.raises(StageError) as excinfo:
            run(small_request(), config)
        assert excinfo.value.stage == STAGE_KEYFRAME

    def test_runs_are_byte_identical_across_roots(self, tmp_path):
        request = small_request()
        config_a = small_config(tmp_path / "rootA")
        config_b = small_config(tmp_path / "rootB")
        run(request, config_a)
        run(request, config_b)
        digest = content_digest(request)
        bytes_a = dir_bytes(config_a.artifact_root / digest)
        bytes_b = dir_bytes(config_b.artifact_root / digest)
        assert bytes_a == bytes_b

    def test_clock_injection_adds_timestamps(self, tmp_path):
        ticks = iter(np.arange(100.0, 200.0, 0.5))
        config = small_config(tmp_path, clock=lambda: float(next(ticks)))
        artifact = run(small_request(), config)
        assert all(r.started_at is not None for r in artifact.provenance)
        assert all(r.duration_ms is not None for r in artifact.provenance)

    def test_no_clock_keeps_manifest_reproducible(self, tmp_path):
        config = small_config(tmp_path)
        artifact = run(small_request(), config)
        assert all(r.started_at is None for r in artifact.provenance)
        assert [r.sequence for r in artifact.provenance] == [0, 1, 2]


def write_manifest(tmp_path, entries) -> Path:
    path = tmp_path / "dataset.json"
    path.write_text(json.dumps(entries), encoding="utf-8")
    return path


def write_fixture_image(tmp_path, name, rng) -> str:
    image = rng_image(rng, 16, 16)
    save_image(image, tmp_path / name)
    return name


class TestEvaluate:
    def test_aggregate_is_mean_of_entries(self, tmp_path):
        rng = np.random.default_rng(101)
        a = write_fixture_image(tmp_path, "a.png", rng)
        b = write_fixture_image(tmp_path, "b.png", rng)
        manifest = write_manifest(tmp_path, [
            {"id": "one", "image_path": a, "text": "a dog runs on the beach"},
            {"id": "two", "image_path": b, "text": "waves crash over rocks"},
        ])
        config = small_config(tmp_path)
        aggregate = evaluate(manifest, config, tmp_path / "out")
        entries = load_manifest(manifest)
        r1 = evaluate_entry(entries[0], config)
        r2 = evaluate_entry(entries[1], config)
        assert aggregate.mse_first == pytest.approx((r1.mse_first + r2.mse_first) / 2)
        assert aggregate.genvideo_clip_temporal == pytest.approx(
            (r1.genvideo_clip_temporal + r2.genvideo_clip_temporal) / 2)
        assert (tmp_path / "out" / "report_one.json").exists()
        assert (tmp_path / "out" / "report.json").exists()
        assert (tmp_path / "out" / "report.csv").exists()

    def test_empty_manifest_is_an_error(self, tmp_path):
        manifest = write_manifest(tmp_path, [])
        config = small_config(tmp_path)
        with pytest.raises(ValidationError):
            evaluate(manifest, config, tmp_path / "out")

    def test_reference_video_populates_reference_fields(self, tmp_path):
        rng = np.random.default_rng(102)
        name = write_fixture_image(tmp_path, "a.png", rng)
        config = small_config(tmp_path)
        # Build the reference as the engine's own output for a perfect match.
        entry_image = tmp_path / name
        from framebridge.imaging import load_image, normalize_ingest
        request_image = normalize_ingest(load_image(entry_image), config.resolution)
        ref_video = MockInterpolator().interpolate(
            request_image, request_image, "p", config.frame_count, 0)
        write_frame_dir(ref_video, tmp_path / "ref")
        manifest = write_manifest(tmp_path, [
            {"id": "one", "image_path": name, "text": "a dog runs on the beach",
             "reference_video_dir": "ref"},
        ])
        aggregate = evaluate(manifest, config, tmp_path / "out")
        assert aggregate.genvideo_refvideo_clip is not None
        assert aggregate.genvideo_refvideo_ssim is not None

    def test_reports_byte_identical_across_runs(self, tmp_path):
        rng = np.random.default_rng(103)
        name = write_fixture_image(tmp_path, "a.png", rng)
        manifest = write_manifest(tmp_path, [
            {"id": "one", "image_path": name, "text": "a dog runs on the beach"},
        ])
        config1 = small_config(tmp_path / "r1")
        config2 = small_config(tmp_path / "r2")
        evaluate(manifest, config1, tmp_path / "out1")
        evaluate(manifest, config2, tmp_path / "out2")
        assert (tmp_path / "out1" / "report.json").read_bytes() == \
            (tmp_path / "out2" / "report.json").read_bytes()

    def test_parallel_evaluation_matches_serial(self, tmp_path):
        rng = np.random.default_rng(104)
        a = write_fixture_image(tmp_path, "a.png", rng)
        b = write_fixture_image(tmp_path, "b.png", rng)
        manifest = write_manifest(tmp_path, [
            {"id": "one", "image_path": a, "text": "a dog runs on the beach"},
            {"id": "two", "image_path": b, "text": "waves crash over rocks"},
        ])
        serial = evaluate(manifest, small_config(tmp_path / "s"), tmp_path / "outs")
        parallel = evaluate(manifest, small_config(tmp_path / "p", eval_parallelism=2),
                            tmp_path / "outp")
        assert serial == parallel


class TestLoadConfig:
    def test_mock_mode(self, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text(
            "[pipeline]\n"
            "frame_count = 6\n"
            "lambda_mask = 0.25\n"
            "artifact_root = 'out'\n"
            "[providers]\n"
            "mode = 'mock'\n",
            encoding="utf-8",
        )
        config = load_config(path)
        assert config.frame_count == 6
        assert config.lambda_mask == 0.25
        assert config.providers.enhancer.provider_id == "mock:enhancer"

    def test_remote_mode_builds_adapters(self, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text(
            "[providers]\n"
            "mode = 'remote'\n"
            "max_retries = 5\n"
            "[providers.endpoints]\n"
            "enhancer = 'http://models.test'\n"
            "detector = 'http://models.test'\n"
            "keyframe = 'http://models.test'\n"
            "interpolator = 'http://models.test'\n"
            "embedder = 'http://models.test'\n",
            encoding="utf-8",
        )
        config = load_config(path)
        assert config.providers.scorer is None
        assert config.providers.detector.endpoint.max_retries == 5

    def test_unknown_mode_rejected(self, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text("[providers]\nmode = 'psychic'\n", encoding="utf-8")
        from framebridge.errors import ConfigError
        with pytest.raises(ConfigError):
            load_config(path)
