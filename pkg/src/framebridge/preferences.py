"""Pairwise human-preference votes and their per-dimension aggregation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError

DIMENSIONS = ("visual_quality", "motion_quality", "text_video_alignment")
CHOICES = ("ours", "baseline", "tie")


@dataclass(frozen=True)
class PreferenceVote:
    """One participant's pick for one item along one dimension."""

    item_id: str
    dimension: str
    choice: str

    def __post_init__(self):
        if self.dimension not in DIMENSIONS:
            raise ValidationError(
                f"unknown dimension {self.dimension!r}; expected one of {DIMENSIONS}"
            )
        if self.choice not in CHOICES:
            raise ValidationError(
                f"unknown choice {self.choice!r}; expected one of {CHOICES}"
            )


def aggregate_preferences(votes: list[PreferenceVote]) -> dict[str, float]:
    """Per-dimension fraction of ours / (ours + baseline).

    Ties never enter the denominator; a dimension whose denominator is empty
    is left out of the result entirely (undefined, not zero). The result is
    invariant under any permutation of the vote list.
    """
    ours = {d: 0 for d in DIMENSIONS}
    baseline = {d: 0 for d in DIMENSIONS}
    for vote in votes:
        if vote.choice == "ours":
            ours[vote.dimension] += 1
        elif vote.choice == "baseline":
            baseline[vote.dimension] += 1
    out = {}
    for d in DIMENSIONS:
        denominator = ours[d] + baseline[d]
        if denominator > 0:
            out[d] = ours[d] / denominator
    return out


def format_percent(fraction: float) -> str:
    """Render a fraction the way comparison tables print it: one decimal percent."""
    return f"{fraction * 100:.1f}%"


def votes_to_csv(votes: list[PreferenceVote]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["item_id", "dimension", "choice"])
    for v in votes:
        writer.writerow([v.item_id, v.dimension, v.choice])
    return buf.getvalue()


def votes_from_csv(text: str) -> list[PreferenceVote]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["item_id", "dimension", "choice"]:
        raise ValidationError(f"unexpected votes CSV header: {header}")
    return [PreferenceVote(item_id=row[0], dimension=row[1], choice=row[2])
            for row in reader if row]


def load_votes(path) -> list[PreferenceVote]:
    return votes_from_csv(Path(path).read_text(encoding="utf-8"))


def save_votes(votes: list[PreferenceVote], path) -> None:
    Path(path).write_text(votes_to_csv(votes), encoding="utf-8")
