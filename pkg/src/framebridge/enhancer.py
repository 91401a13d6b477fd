"""Instruction building and response parsing for the enhancement stage.

A text-completion model is instructed to answer with three labeled sections
(KEYWORDS / FRAME_STATE / OPTIMIZATION); this module renders that instruction
from a slotted template, parses the sections back into a PromptBundle, and
retries when a response is unparseable. ``TextCompletionEnhancer`` wraps any
plain ``str -> str`` completion function into the enhancer provider role.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from .errors import EnhancementError, ValidationError
from .model import PromptBundle

SECTION_MARKERS = ("KEYWORDS:", "FRAME_STATE:", "OPTIMIZATION:")

_SLOT_RE = re.compile(r"\{([a-z_]+)\}")


@dataclass(frozen=True)
class EnhancerTemplate:
    """The instruction text with {user_text} and {hint} slots."""

    instruction_text: str
    response_grammar: str = (
        "KEYWORDS: <comma-separated key objects>\n"
        "FRAME_STATE: <one sentence describing the input frame>\n"
        "OPTIMIZATION: <one sentence steering the video refinement>"
    )

    def __post_init__(self):
        for marker in SECTION_MARKERS:
            if marker not in self.response_grammar:
                raise ValidationError(f"response grammar missing section {marker!r}")


def default_template() -> EnhancerTemplate:
    text = resources.files("framebridge.data").joinpath("enhancer_template.txt").read_text("utf-8")
    return EnhancerTemplate(instruction_text=text)


def build_instruction(user_text: str, hint: str, template: EnhancerTemplate) -> str:
    """Substitute both slots; unresolved or unknown slots are errors."""
    if not user_text.strip():
        raise ValidationError("user_text must be non-empty")
    values = {"user_text": user_text, "hint": hint}

    def sub(match: re.Match) -> str:
        name = match.group(1)
        if name not in values:
            raise ValidationError(f"template references unknown slot {{{name}}}")
        return values[name]

    rendered = _SLOT_RE.sub(sub, template.instruction_text)
    leftover = _SLOT_RE.search(rendered)
    if leftover:
        raise ValidationError(f"unresolved slot {{{leftover.group(1)}}} after substitution")
    return rendered


def parse_bundle(response: str, raw_user_text: str = "") -> PromptBundle:
    """Parse the three labeled sections out of a model response.

    Sections may appear in any order; a section runs until the next marker.
    Keywords are comma-split, trimmed, and de-duplicated case-insensitively
    keeping the first occurrence.
    """
    positions = []
    for marker in SECTION_MARKERS:
        idx = response.find(marker)
        if idx < 0:
            raise ValidationError(f"response is missing section {marker!r}")
        positions.append((idx, marker))
    positions.sort()

    sections: dict[str, str] = {}
    for i, (idx, marker) in enumerate(positions):
        end = positions[i + 1][0] if i + 1 < len(positions) else len(response)
        sections[marker] = response[idx + len(marker):end].strip()

    keywords: list[str] = []
    seen: set[str] = set()
    for part in sections["KEYWORDS:"].split(","):
        part = part.strip()
        if not part or part.lower() in seen:
            continue
        seen.add(part.lower())
        keywords.append(part)
    if not keywords:
        raise ValidationError("keyword list is empty after trimming")

    return PromptBundle(
        keywords=tuple(keywords),
        frame_state=sections["FRAME_STATE:"],
        optimization_prompt=sections["OPTIMIZATION:"],
        raw_user_text=raw_user_text,
    )


def render_bundle(bundle: PromptBundle) -> str:
    """Canonical labeled-section rendering; parse_bundle inverts it."""
    return (
        f"KEYWORDS: {', '.join(bundle.keywords)}\n"
        f"FRAME_STATE: {bundle.frame_state}\n"
        f"OPTIMIZATION: {bundle.optimization_prompt}"
    )


def enhance_with_retry(user_text: str, hint: str, template: EnhancerTemplate,
                       attempts: int, complete: Callable[[str], str]) -> PromptBundle:
    """Call the completion function until a response parses, at most ``attempts`` times.

    On exhaustion the raised error carries every raw response.
    """
    if attempts < 1:
        raise ValidationError("attempts must be >= 1")
    instruction = build_instruction(user_text, hint, template)
    raw_responses: list[str] = []
    for _ in range(attempts):
        response = complete(instruction)
        raw_responses.append(response)
        try:
            return parse_bundle(response, raw_user_text=user_text)
        except ValidationError:
            continue
    raise EnhancementError(
        f"no parseable enhancement after {attempts} attempts", raw_responses
    )


class TextCompletionEnhancer:
    """Adapts a raw text-completion callable to the enhancer provider role."""

    def __init__(self, complete: Callable[[str], str],
                 template: EnhancerTemplate | None = None,
                 attempts: int = 3,
                 provider_id: str = "completion:enhancer"):
        self.complete = complete
        self.template = template if template is not None else default_template()
        self.attempts = attempts
        self.provider_id = provider_id

    def enhance(self, user_text: str, image_caption_hint: str = "") -> PromptBundle:
        return enhance_with_retry(
            user_text, image_caption_hint, self.template, self.attempts, self.complete
        )
