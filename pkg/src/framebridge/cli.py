"""Command-line entry points: run one generation, evaluate a dataset, reprint reports.

    framebridge run --image photo.png --text "a dog runs on the beach"
    framebridge eval --manifest dataset.json --config pipeline.toml --out results/
    framebridge report --in results/ --format csv

Without --config the engine runs entirely on the deterministic mock
providers, which is enough to exercise the full workflow offline. Remote
providers read their bearer token from the FRAMEBRIDGE_TOKEN environment
variable.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .errors import FramebridgeError
from .imaging import load_image, normalize_ingest
from .model import GenerationRequest, content_digest
from .pipeline import PipelineConfig, default_config, evaluate, load_config, run
from .report import ingest_report, report_to_csv, report_to_json


def _config_from_args(args) -> PipelineConfig:
    if args.config:
        return load_config(args.config, clock=time.time)
    return default_config(clock=time.time, artifact_root=args.artifact_root)


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    image = normalize_ingest(load_image(args.image), config.resolution)
    request = GenerationRequest(
        input_image=image,
        user_text=args.text,
        frame_count=args.frames if args.frames else config.frame_count,
        seed=args.seed if args.seed is not None else config.seed,
        lambda_mask=config.lambda_mask,
        candidate_count=config.candidate_count,
    )
    artifact = run(request, config)
    out_dir = config.artifact_root / content_digest(request)
    print(f"artifact: {out_dir}")
    print(f"frames:   {len(artifact.video)} @ {artifact.video.frames_per_second} fps")
    print(f"keywords: {', '.join(artifact.prompt_bundle.keywords)}")
    return 0


def _cmd_eval(args) -> int:
    config = _config_from_args(args)
    aggregate = evaluate(args.manifest, config, args.out)
    print(f"reports written to {args.out}")
    print(report_to_csv(aggregate), end="")
    return 0


def _cmd_report(args) -> int:
    in_path = Path(args.in_dir)
    report_file = in_path if in_path.is_file() else in_path / "report.json"
    report = ingest_report(report_file)
    if args.format == "csv":
        print(report_to_csv(report), end="")
    else:
        print(report_to_json(report), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="framebridge",
        description="Keyframe-bracketed image+text-to-video generation and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="generate one video from an image and text")
    p_run.add_argument("--image", required=True, help="input image (PNG)")
    p_run.add_argument("--text", required=True, help="what the video should show")
    p_run.add_argument("--frames", type=int, default=None, help="frame count (>= 2)")
    p_run.add_argument("--seed", type=int, default=None, help="generation seed")
    p_run.add_argument("--config", default=None, help="pipeline TOML config")
    p_run.add_argument("--artifact-root", default="artifacts",
                       help="artifact directory when no config is given")
    p_run.set_defaults(func=_cmd_run)

    p_eval = sub.add_parser("eval", help="evaluate every entry of a dataset manifest")
    p_eval.add_argument("--manifest", required=True, help="dataset manifest (JSON)")
    p_eval.add_argument("--config", default=None, help="pipeline TOML config")
    p_eval.add_argument("--out", required=True, help="report output directory")
    p_eval.add_argument("--artifact-root", default="artifacts",
                        help="artifact directory when no config is given")
    p_eval.set_defaults(func=_cmd_eval)

    p_rep = sub.add_parser("report", help="reprint an emitted report as json or csv")
    p_rep.add_argument("--in", dest="in_dir", required=True,
                       help="report file or directory containing report.json")
    p_rep.add_argument("--format", choices=("json", "csv"), default="json")
    p_rep.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FramebridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
