"""Per-video metric reports: building, emission (JSON/CSV) and re-ingestion.

Reference-dependent fields are absent (None) exactly when no reference video
was supplied; the ``dover`` field (the external quality model's mean frame
score) is absent when no scorer provider is configured. CSV rows follow the
fixed metric order below so emitted tables line up across runs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .imaging import FrameSequence, ImageBuffer
from .metrics import (
    clip_corresponding,
    clip_image_video,
    clip_refvideo,
    clip_temporal,
    clip_text_video,
    mse_first,
    video_ssim,
)
from .providers.base import Embedder, QualityScorer

#: Emission order for report fields (rows of the CSV form).
FIELD_ORDER = (
    "mse_first",
    "image_genvideo_clip",
    "genvideo_text_clip",
    "genvideo_refvideo_corresponding",
    "genvideo_clip_temporal",
    "genvideo_refvideo_clip",
    "dover",
    "genvideo_refvideo_ssim",
)

_RANGES = {
    "mse_first": (0.0, float("inf")),
    "image_genvideo_clip": (-1.0, 1.0),
    "genvideo_text_clip": (-1.0, 1.0),
    "genvideo_refvideo_corresponding": (-1.0, 1.0),
    "genvideo_clip_temporal": (-1.0, 1.0),
    "genvideo_refvideo_clip": (-1.0, 1.0),
    "dover": (0.0, 1.0),
    "genvideo_refvideo_ssim": (-1.0, 1.0),
}

_RANGE_EPS = 1e-9

_REFERENCE_FIELDS = (
    "genvideo_refvideo_corresponding",
    "genvideo_refvideo_clip",
    "genvideo_refvideo_ssim",
)


@dataclass(frozen=True)
class MetricReport:
    """One evaluated video, one value per metric; None marks an absent metric."""

    mse_first: float
    image_genvideo_clip: float
    genvideo_text_clip: float
    genvideo_clip_temporal: float
    genvideo_refvideo_corresponding: float | None = None
    genvideo_refvideo_clip: float | None = None
    dover: float | None = None
    genvideo_refvideo_ssim: float | None = None

    def __post_init__(self):
        for name, (lo, hi) in _RANGES.items():
            value = getattr(self, name)
            if value is None:
                continue
            if not (lo - _RANGE_EPS <= value <= hi + _RANGE_EPS):
                raise ValidationError(f"{name}={value} outside [{lo}, {hi}]")
        ref_present = [getattr(self, f) is not None for f in _REFERENCE_FIELDS]
        if any(ref_present) and not all(ref_present):
            raise ValidationError(
                "reference-dependent fields must be all present or all absent"
            )

    @property
    def has_reference(self) -> bool:
        return self.genvideo_refvideo_clip is not None

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in FIELD_ORDER
                if getattr(self, name) is not None}

    @classmethod
    def from_dict(cls, data: dict) -> "MetricReport":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown report fields: {sorted(unknown)}")
        return cls(**data)


def build_report(input_image: ImageBuffer, prompt_text: str, video: FrameSequence,
                 embedder: Embedder, *, reference: FrameSequence | None = None,
                 scorer: QualityScorer | None = None) -> MetricReport:
    """Compute every metric the inputs allow.

    The quality score is the mean per-frame scorer output; with no scorer
    configured it is reported absent, never zero.
    """
    dover = None
    if scorer is not None:
        dover = float(np.mean([scorer.score_quality(f) for f in video.frames]))
    kwargs = {}
    if reference is not None:
        kwargs = {
            "genvideo_refvideo_corresponding": clip_corresponding(video, reference, embedder),
            "genvideo_refvideo_clip": clip_refvideo(video, reference, embedder),
            "genvideo_refvideo_ssim": video_ssim(video, reference),
        }
    return MetricReport(
        mse_first=mse_first(input_image, video),
        image_genvideo_clip=clip_image_video(input_image, video, embedder),
        genvideo_text_clip=clip_text_video(prompt_text, video, embedder),
        genvideo_clip_temporal=clip_temporal(video, embedder),
        dover=dover,
        **kwargs,
    )


def report_to_json(report: MetricReport) -> str:
    ordered = {name: getattr(report, name) for name in FIELD_ORDER
               if getattr(report, name) is not None}
    return json.dumps(ordered, indent=2) + "\n"


def report_to_csv(report: MetricReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "value"])
    for name in FIELD_ORDER:
        value = getattr(report, name)
        writer.writerow([name, "" if value is None else repr(value)])
    return buf.getvalue()


def report_from_json(text: str) -> MetricReport:
    return MetricReport.from_dict(json.loads(text))


def report_from_csv(text: str) -> MetricReport:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["metric", "value"]:
        raise ValidationError(f"unexpected CSV header: {header}")
    data = {}
    for row in reader:
        if not row:
            continue
        name, raw = row[0], row[1]
        if raw != "":
            data[name] = float(raw)
    return MetricReport.from_dict(data)


def emit_report(report: MetricReport, path, fmt: str | None = None) -> Path:
    """Write the report as JSON or CSV; the format defaults to the file suffix."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".")
    if fmt == "json":
        path.write_text(report_to_json(report), encoding="utf-8")
    elif fmt == "csv":
        path.write_text(report_to_csv(report), encoding="utf-8")
    else:
        raise ValidationError(f"unknown report format {fmt!r} (use json or csv)")
    return path


def ingest_report(path) -> MetricReport:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".csv":
        return report_from_csv(text)
    return report_from_json(text)


def aggregate_reports(reports: list[MetricReport]) -> MetricReport:
    """Field-wise mean across reports; a field is present iff any report has it."""
    if not reports:
        raise ValidationError("cannot aggregate an empty report list")
    data = {}
    for name in FIELD_ORDER:
        values = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        if values:
            data[name] = float(np.mean(values))
    return MetricReport.from_dict(data)
