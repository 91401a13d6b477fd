"""On-disk artifact layout: frame directories plus a self-describing manifest.

One artifact directory per request digest:

    <root>/<digest>/
        manifest.json
        frames/frame_00000.png ...
        end_frame.png
        masks/mask_00_<label>.png ...
        candidates/candidate_<seed>.png
        candidates/scores.json

Writes go to a temporary sibling directory which is renamed into place, so
readers never observe a half-written artifact.
"""

from __future__ import annotations

import base64
import json
import re
import shutil
import uuid
from pathlib import Path

from .errors import ValidationError
from .imaging import (
    FrameSequence,
    decode_mask_png,
    decode_png,
    encode_mask_png,
    encode_png,
    load_image,
    save_image,
)
from .keyframe import Candidate, CandidateScore
from .model import (
    GenerationArtifact,
    GenerationRequest,
    MaskEntry,
    MaskSet,
    PromptBundle,
    StageRecord,
)

MANIFEST_SCHEMA = "framebridge.artifact.v1"

_LABEL_SAFE_RE = re.compile(r"[^a-z0-9_-]+")


def _safe_label(label: str) -> str:
    return _LABEL_SAFE_RE.sub("_", label.lower()) or "mask"


def frame_filename(index: int) -> str:
    return f"frame_{index:05d}.png"


def request_to_dict(request: GenerationRequest) -> dict:
    """JSON-safe encoding; the image travels as base64 PNG."""
    return {
        "image_png_b64": base64.b64encode(encode_png(request.input_image)).decode("ascii"),
        "user_text": request.user_text,
        "frame_count": request.frame_count,
        "seed": request.seed,
        "lambda_mask": request.lambda_mask,
        "candidate_count": request.candidate_count,
    }


def request_from_dict(data: dict) -> GenerationRequest:
    return GenerationRequest(
        input_image=decode_png(base64.b64decode(data["image_png_b64"])),
        user_text=data["user_text"],
        frame_count=data["frame_count"],
        seed=data["seed"],
        lambda_mask=data["lambda_mask"],
        candidate_count=data["candidate_count"],
    )


def write_frame_dir(video: FrameSequence, directory: Path) -> list[str]:
    """Write zero-padded frame files; returns the filenames in order."""
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i, frame in enumerate(video.frames):
        name = frame_filename(i)
        save_image(frame, directory / name)
        names.append(name)
    return names


def read_frame_dir(directory: Path, frames_per_second: float = 8.0) -> FrameSequence:
    """Load frame_*.png files in name order into a sequence."""
    directory = Path(directory)
    files = sorted(directory.glob("frame_*.png"))
    if not files:
        raise ValidationError(f"no frame_*.png files in {directory}")
    frames = tuple(load_image(f) for f in files)
    return FrameSequence(frames=frames, frames_per_second=frames_per_second)


def write_artifact(artifact: GenerationArtifact, root: Path, *,
                   candidates: tuple[Candidate, ...] = (),
                   selected_seed: int | None = None,
                   config_snapshot: dict | None = None,
                   request: GenerationRequest | None = None) -> Path:
    """Persist the artifact under root/<digest>/ atomically; returns the directory."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    final_dir = root / artifact.request_digest
    tmp_dir = root / f".tmp-{artifact.request_digest}-{uuid.uuid4().hex[:8]}"
    tmp_dir.mkdir(parents=True)
    try:
        frame_names = write_frame_dir(artifact.video, tmp_dir / "frames")
        save_image(artifact.end_frame, tmp_dir / "end_frame.png")

        mask_records = []
        masks_dir = tmp_dir / "masks"
        if artifact.mask_set.entries:
            masks_dir.mkdir()
        for i, entry in enumerate(artifact.mask_set.entries):
            name = f"mask_{i:02d}_{_safe_label(entry.label)}.png"
            (masks_dir / name).write_bytes(encode_mask_png(entry.mask))
            mask_records.append(
                {"label": entry.label, "confidence": entry.confidence, "file": name}
            )

        candidate_records = []
        if candidates:
            cand_dir = tmp_dir / "candidates"
            cand_dir.mkdir()
            for cand in candidates:
                name = f"candidate_{cand.seed}.png"
                save_image(cand.image, cand_dir / name)
                record = {"seed": cand.seed, "file": name, **cand.score.to_dict()}
                record["selected"] = cand.seed == selected_seed
                candidate_records.append(record)
            (cand_dir / "scores.json").write_text(
                json.dumps(candidate_records, indent=2) + "\n", encoding="utf-8"
            )

        if request is not None:
            (tmp_dir / "request.json").write_text(
                json.dumps(request_to_dict(request), indent=2) + "\n", encoding="utf-8"
            )

        manifest = {
            "schema": MANIFEST_SCHEMA,
            "request_digest": artifact.request_digest,
            "fps": artifact.video.frames_per_second,
            "width": artifact.video.width,
            "height": artifact.video.height,
            "frame_count": len(artifact.video),
            "frames": frame_names,
            "end_frame": "end_frame.png",
            "prompt_bundle": artifact.prompt_bundle.to_dict(),
            "masks": mask_records,
            "candidates": candidate_records,
            "provenance": [r.to_dict() for r in artifact.provenance],
            "config": config_snapshot or {},
        }
        (tmp_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

        if final_dir.exists():
            shutil.rmtree(final_dir)
        tmp_dir.rename(final_dir)
    finally:
        if tmp_dir.exists():
            shutil.rmtree(tmp_dir)
    return final_dir


def load_artifact(directory: Path) -> GenerationArtifact:
    """Read an artifact directory back into memory, validating the layout."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise ValidationError(f"{directory} has no manifest.json")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise ValidationError(f"unknown artifact schema {manifest.get('schema')!r}")

    frames = tuple(load_image(directory / "frames" / name) for name in manifest["frames"])
    video = FrameSequence(frames=frames, frames_per_second=manifest["fps"])
    if len(video) != manifest["frame_count"]:
        raise ValidationError("manifest frame_count disagrees with frame files")

    end_frame = load_image(directory / manifest["end_frame"])
    entries = tuple(
        MaskEntry(
            label=rec["label"],
            confidence=rec["confidence"],
            mask=decode_mask_png((directory / "masks" / rec["file"]).read_bytes()),
        )
        for rec in manifest["masks"]
    )
    mask_set = MaskSet(width=manifest["width"], height=manifest["height"], entries=entries)

    return GenerationArtifact(
        request_digest=manifest["request_digest"],
        prompt_bundle=PromptBundle.from_dict(manifest["prompt_bundle"]),
        mask_set=mask_set,
        end_frame=end_frame,
        video=video,
        provenance=tuple(StageRecord.from_dict(r) for r in manifest["provenance"]),
    )


def load_candidate_scores(directory: Path) -> list[dict]:
    path = Path(directory) / "candidates" / "scores.json"
    if not path.exists():
        return []
    return json.loads(path.read_text(encoding="utf-8"))


def candidate_score_from_record(record: dict) -> CandidateScore:
    return CandidateScore(
        l_detect=record["l_detect"],
        l_mask=record["l_mask"],
        l_video=record["l_video"],
        lambda_mask=record["lambda"],
        total=record["total"],
    )
