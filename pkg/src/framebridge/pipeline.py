"""End-to-end orchestration: enhance -> keyframe -> video, caching, evaluation.

A run executes the three stages in order, persists a self-describing artifact
directory keyed by the request content digest, and returns the loaded
artifact on a cache hit without touching any provider. Failures surface as
StageError naming the stage. Wall-clock provenance is only recorded when a
clock is injected, so library runs are byte-reproducible by default.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .artifacts import load_artifact, read_frame_dir, write_artifact
from .errors import ConfigError, StageError, ValidationError
from .imaging import DEFAULT_RESOLUTION, load_image, normalize_ingest
from .keyframe import KeyframeResult, generate_end_frame
from .model import GenerationArtifact, GenerationRequest, StageRecord, content_digest
from .providers.base import ProviderEndpoint, ProviderSet
from .providers.mocks import mock_provider_set
from .providers.remote import DEFAULT_FPS, remote_provider_set
from .report import MetricReport, aggregate_reports, build_report, emit_report
from .video import synthesize

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

STAGE_ENHANCER = "prompt_enhancer"
STAGE_KEYFRAME = "keyframe_generator"
STAGE_VIDEO = "video_generator"


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs besides the request itself."""

    providers: ProviderSet
    artifact_root: Path = Path("artifacts")
    lambda_mask: float = 0.5
    candidate_count: int = 4
    frame_count: int = 16
    resolution: int = DEFAULT_RESOLUTION
    confidence_floor: float = 0.25
    seed: int = 0
    cache_enabled: bool = True
    eval_parallelism: int = 1
    clock: Callable[[], float] | None = None

    def __post_init__(self):
        if self.frame_count < 2:
            raise ConfigError("frame_count must be >= 2")
        if self.candidate_count < 1:
            raise ConfigError("candidate_count must be >= 1")
        if self.eval_parallelism < 1:
            raise ConfigError("eval_parallelism must be >= 1")
        object.__setattr__(self, "artifact_root", Path(self.artifact_root))

    def snapshot(self) -> dict:
        """The manifest-embedded description of this configuration."""
        return {
            "lambda_mask": self.lambda_mask,
            "candidate_count": self.candidate_count,
            "frame_count": self.frame_count,
            "resolution": self.resolution,
            "confidence_floor": self.confidence_floor,
            "seed": self.seed,
            "providers": self.providers.identities(),
        }


class _StageTimer:
    """Builds provenance records; timestamps only when a clock exists."""

    def __init__(self, clock: Callable[[], float] | None):
        self.clock = clock
        self.records: list[StageRecord] = []

    def record(self, stage: str, provider_id: str, run: Callable):
        started = self.clock() if self.clock else None
        try:
            result = run()
        except Exception as exc:
            raise StageError(stage, exc) from exc
        duration = (self.clock() - started) * 1000.0 if self.clock else None
        self.records.append(StageRecord(
            stage=stage, provider_id=provider_id, sequence=len(self.records),
            started_at=started, duration_ms=duration,
        ))
        return result


def run(request: GenerationRequest, config: PipelineConfig) -> GenerationArtifact:
    """Execute the full workflow for one request, or return the cached artifact."""
    digest = content_digest(request)
    artifact_dir = config.artifact_root / digest
    if config.cache_enabled and (artifact_dir / "manifest.json").exists():
        cached = load_artifact(artifact_dir)
        if cached.video.frames[0] != request.input_image:
            raise ValidationError(
                f"cached artifact {digest} does not start with the request image"
            )
        return cached

    providers = config.providers
    timer = _StageTimer(config.clock)

    bundle = timer.record(
        STAGE_ENHANCER, providers.enhancer.provider_id,
        lambda: providers.enhancer.enhance(request.user_text, ""),
    )
    keyframe_result: KeyframeResult = timer.record(
        STAGE_KEYFRAME, providers.keyframe.provider_id,
        lambda: generate_end_frame(
            request, bundle, providers, confidence_floor=config.confidence_floor
        ),
    )
    video = timer.record(
        STAGE_VIDEO, providers.interpolator.provider_id,
        lambda: synthesize(
            request.input_image, keyframe_result.end_frame, bundle,
            request.frame_count, request.seed, providers.interpolator,
        ),
    )

    artifact = GenerationArtifact.build(
        request,
        prompt_bundle=bundle,
        mask_set=keyframe_result.key_masks,
        end_frame=keyframe_result.end_frame,
        video=video,
        provenance=tuple(timer.records),
    )
    write_artifact(
        artifact, config.artifact_root,
        candidates=keyframe_result.candidates,
        selected_seed=_selected_seed(keyframe_result),
        config_snapshot=config.snapshot(),
        request=request,
    )
    return artifact


def _selected_seed(result: KeyframeResult) -> int:
    for cand in result.candidates:
        if cand.image == result.end_frame and cand.score == result.score:
            return cand.seed
    return result.candidates[0].seed


@dataclass(frozen=True)
class ManifestEntry:
    """One dataset item: an image, its text, and an optional reference video."""

    id: str
    image_path: Path
    text: str
    reference_video_dir: Path | None = None
    seed: int | None = None


def load_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValidationError("dataset manifest must be a JSON list")
    if not data:
        raise ValidationError("dataset manifest is empty")
    entries = []
    base = path.parent
    for i, item in enumerate(data):
        for key in ("id", "image_path", "text"):
            if key not in item:
                raise ValidationError(f"manifest entry {i} is missing {key!r}")
        ref = item.get("reference_video_dir")
        entries.append(ManifestEntry(
            id=str(item["id"]),
            image_path=base / item["image_path"],
            text=item["text"],
            reference_video_dir=(base / ref) if ref else None,
            seed=item.get("seed"),
        ))
    return entries


def request_for_entry(entry: ManifestEntry, config: PipelineConfig) -> GenerationRequest:
    image = normalize_ingest(load_image(entry.image_path), config.resolution)
    return GenerationRequest(
        input_image=image,
        user_text=entry.text,
        frame_count=config.frame_count,
        seed=entry.seed if entry.seed is not None else config.seed,
        lambda_mask=config.lambda_mask,
        candidate_count=config.candidate_count,
    )


def evaluate_entry(entry: ManifestEntry, config: PipelineConfig) -> MetricReport:
    """Run (or load) the pipeline for one entry and build its metric report."""
    request = request_for_entry(entry, config)
    artifact = run(request, config)
    reference = None
    if entry.reference_video_dir is not None:
        reference = read_frame_dir(entry.reference_video_dir,
                                   artifact.video.frames_per_second)
    return build_report(
        request.input_image, entry.text, artifact.video, config.providers.embedder,
        reference=reference, scorer=config.providers.scorer,
    )


def evaluate(manifest_path, config: PipelineConfig, out_dir) -> MetricReport:
    """Evaluate every manifest entry and emit per-entry plus aggregate reports.

    Entries may run concurrently up to ``config.eval_parallelism``; the
    aggregate is computed in manifest order, so results are order-independent.
    """
    entries = load_manifest(manifest_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if config.eval_parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.eval_parallelism) as pool:
            reports = list(pool.map(lambda e: evaluate_entry(e, config), entries))
    else:
        reports = [evaluate_entry(e, config) for e in entries]

    for entry, rep in zip(entries, reports):
        emit_report(rep, out_dir / f"report_{entry.id}.json")
    aggregate = aggregate_reports(reports)
    emit_report(aggregate, out_dir / "report.json")
    emit_report(aggregate, out_dir / "report.csv")
    return aggregate


def load_config(path, *, clock: Callable[[], float] | None = None) -> PipelineConfig:
    """Build a PipelineConfig from a TOML file.

    ``[providers] mode`` selects "mock" (default) or "remote"; remote mode
    reads one base URL per role from ``[providers.endpoints]``.
    """
    raw = _toml.loads(Path(path).read_text(encoding="utf-8"))
    pipe = raw.get("pipeline", {})
    prov = raw.get("providers", {})
    mode = prov.get("mode", "mock")
    fps = float(prov.get("fps", DEFAULT_FPS))

    if mode == "mock":
        providers = mock_provider_set(fps=fps)
    elif mode == "remote":
        urls = prov.get("endpoints", {})
        endpoints = {
            role: ProviderEndpoint(
                role=role,
                base_url=url,
                timeout_ms=int(prov.get("timeout_ms", 30_000)),
                max_retries=int(prov.get("max_retries", 2)),
                backoff_base_ms=int(prov.get("backoff_base_ms", 250)),
            )
            for role, url in urls.items()
        }
        providers = remote_provider_set(endpoints, fps=fps)
    else:
        raise ConfigError(f"unknown providers.mode {mode!r} (use mock or remote)")

    return PipelineConfig(
        providers=providers,
        artifact_root=Path(pipe.get("artifact_root", "artifacts")),
        lambda_mask=float(pipe.get("lambda_mask", 0.5)),
        candidate_count=int(pipe.get("candidate_count", 4)),
        frame_count=int(pipe.get("frame_count", 16)),
        resolution=int(pipe.get("resolution", DEFAULT_RESOLUTION)),
        confidence_floor=float(pipe.get("confidence_floor", 0.25)),
        seed=int(pipe.get("seed", 0)),
        cache_enabled=bool(pipe.get("cache_enabled", True)),
        eval_parallelism=int(pipe.get("eval_parallelism", 1)),
        clock=clock,
    )


def default_config(*, clock: Callable[[], float] | None = None,
                   artifact_root: Path | str = "artifacts") -> PipelineConfig:
    """Mock-provider configuration used when no config file is given."""
    return PipelineConfig(providers=mock_provider_set(), clock=clock,
                          artifact_root=Path(artifact_root))


__all__ = [
    "PipelineConfig",
    "ManifestEntry",
    "run",
    "evaluate",
    "evaluate_entry",
    "load_manifest",
    "load_config",
    "default_config",
    "request_for_entry",
]
