"""framebridge: keyframe-bracketed image+text-to-video orchestration and evaluation.

The engine decomposes user input into sub-prompts, synthesizes a terminal
keyframe by mask-guided candidate selection, brackets a frame interpolator
between the start image and that keyframe, and scores results with an
embedding- and pixel-based metric suite. All heavy models live out of
process behind a small HTTP+JSON protocol; deterministic in-process mocks
make the whole workflow runnable offline.
"""

from .diffusion import (
    LatentState,
    NoiseSchedule,
    forward_marginal,
    forward_step,
    make_linear_schedule,
)
from .errors import (
    ConfigError,
    ContractViolationError,
    DimensionMismatchError,
    EnhancementError,
    FramebridgeError,
    ProviderError,
    ProviderResponseError,
    ProviderUnavailableError,
    StageError,
    ValidationError,
)
from .imaging import (
    FrameSequence,
    ImageBuffer,
    center_crop_square,
    decode_png,
    encode_png,
    load_image,
    normalize_ingest,
    resize_bilinear,
    save_image,
)
from .keyframe import (
    Candidate,
    CandidateScore,
    KeyframeResult,
    generate_end_frame,
    pick_best_candidate,
    score_candidate,
    select_key_masks,
)
from .model import (
    GenerationArtifact,
    GenerationRequest,
    MaskEntry,
    MaskSet,
    PromptBundle,
    content_digest,
)
from .pipeline import PipelineConfig, default_config, evaluate, load_config, run
from .preferences import PreferenceVote, aggregate_preferences, format_percent
from .providers import Embedding, ProviderEndpoint, ProviderSet, mock_provider_set
from .report import MetricReport, aggregate_reports, build_report, emit_report, ingest_report
from .video import eval_against_reference, synthesize

__version__ = "0.1.0"

__all__ = [
    "LatentState",
    "NoiseSchedule",
    "forward_marginal",
    "forward_step",
    "make_linear_schedule",
    "ConfigError",
    "ContractViolationError",
    "DimensionMismatchError",
    "EnhancementError",
    "FramebridgeError",
    "ProviderError",
    "ProviderResponseError",
    "ProviderUnavailableError",
    "StageError",
    "ValidationError",
    "FrameSequence",
    "ImageBuffer",
    "center_crop_square",
    "decode_png",
    "encode_png",
    "load_image",
    "normalize_ingest",
    "resize_bilinear",
    "save_image",
    "Candidate",
    "CandidateScore",
    "KeyframeResult",
    "generate_end_frame",
    "pick_best_candidate",
    "score_candidate",
    "select_key_masks",
    "GenerationArtifact",
    "GenerationRequest",
    "MaskEntry",
    "MaskSet",
    "PromptBundle",
    "content_digest",
    "PipelineConfig",
    "default_config",
    "evaluate",
    "load_config",
    "run",
    "PreferenceVote",
    "aggregate_preferences",
    "format_percent",
    "Embedding",
    "ProviderEndpoint",
    "ProviderSet",
    "mock_provider_set",
    "MetricReport",
    "aggregate_reports",
    "build_report",
    "emit_report",
    "ingest_report",
    "eval_against_reference",
    "synthesize",
]
