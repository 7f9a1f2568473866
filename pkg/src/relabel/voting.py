"""Pseudo ground truth on the calibration subset via thresholded voting.

Each method casts one vote per (image, label) it predicted; labels reaching
the vote threshold k form the pseudo ground-truth set for that image.
Human-verified labels, where they exist, override the pseudo set image by
image. The calibration subset defaults to the first 100 images of the
universe; the vote threshold is run configuration (the majority default
``ceil(m/2)`` is this artifact's choice, not a published setting).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .errors import UnknownImageError, UnknownMethodError
from .ingestion import PredictionMatrix
from .labelspace import LabelVocabulary

__all__ = [
    "VoteTally",
    "PseudoGroundTruth",
    "CalibrationSet",
    "tally_votes",
    "pseudo_ground_truth",
    "effective_ground_truth",
    "majority_threshold",
    "load_verified_labels",
]

DEFAULT_CALIBRATION_SIZE = 100


@dataclass(frozen=True)
class VoteTally:
    """Per-image vote counts; labels nobody predicted are implicitly zero."""

    images: tuple[str, ...]
    method_count: int
    votes: Mapping[str, Mapping[str, int]]

    def count(self, image_id: str, label: str) -> int:
        return self.votes[image_id].get(label, 0)


@dataclass(frozen=True)
class PseudoGroundTruth:
    """Label sets that gathered at least ``k`` of ``m`` votes, per image."""

    sets: Mapping[str, frozenset[str]]
    k: int
    m: int


@dataclass(frozen=True)
class CalibrationSet:
    """The images used to estimate method expertise, plus human verdicts.

    ``verified`` only holds images a human actually ruled on; an explicit
    empty set is a real verdict ("none of these labels apply") and beats a
    non-empty pseudo set.
    """

    image_ids: tuple[str, ...]
    verified: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.image_ids:
            raise ValueError("calibration set is empty")

    @classmethod
    def first_n(
        cls,
        image_universe: Sequence[str],
        n: int = DEFAULT_CALIBRATION_SIZE,
        verified: Optional[Mapping[str, frozenset[str]]] = None,
    ) -> "CalibrationSet":
        if n < 1:
            raise ValueError(f"calibration size must be >= 1, got {n}")
        return cls(image_ids=tuple(image_universe[:n]), verified=dict(verified or {}))


def majority_threshold(method_count: int) -> int:
    """Strict-majority vote threshold: ceil(m/2)."""
    return math.ceil(method_count / 2)


def tally_votes(
    matrix: PredictionMatrix,
    images: Sequence[str],
    methods: Optional[Sequence[str]] = None,
) -> VoteTally:
    """Count, per image, how many methods predicted each label."""
    method_ids = tuple(methods) if methods is not None else matrix.methods
    for m in method_ids:
        if m not in matrix.methods:
            raise UnknownMethodError(f"unknown method {m!r}")
    votes: dict[str, dict[str, int]] = {}
    for image_id in images:
        if image_id not in matrix.cells:
            raise UnknownImageError(f"unknown image {image_id!r}")
        counts: dict[str, int] = {}
        row = matrix.cells[image_id]
        for method_id in method_ids:
            cell = row.get(method_id)
            if cell is None:
                continue
            for label in cell.labels:
                counts[label] = counts.get(label, 0) + 1
        votes[image_id] = counts
    return VoteTally(images=tuple(images), method_count=len(method_ids), votes=votes)


def pseudo_ground_truth(tally: VoteTally, k: int) -> PseudoGroundTruth:
    """Keep labels with at least k votes; empty sets are possible and legal."""
    if not 1 <= k <= tally.method_count:
        raise ValueError(
            f"vote threshold k={k} out of range [1, {tally.method_count}]"
        )
    sets = {
        image_id: frozenset(lbl for lbl, v in counts.items() if v >= k)
        for image_id, counts in tally.votes.items()
    }
    return PseudoGroundTruth(sets=sets, k=k, m=tally.method_count)


def effective_ground_truth(
    pgt: PseudoGroundTruth,
    cal: CalibrationSet,
) -> dict[str, frozenset[str]]:
    """Human-verified set where present, pseudo ground truth elsewhere."""
    out: dict[str, frozenset[str]] = {}
    for image_id in cal.image_ids:
        if image_id in cal.verified:
            out[image_id] = frozenset(cal.verified[image_id])
        else:
            out[image_id] = pgt.sets.get(image_id, frozenset())
    return out


def load_verified_labels(
    path: str | Path,
    vocab: LabelVocabulary,
) -> dict[str, frozenset[str]]:
    """Read a verified-labels JSONL file: {"image_id", "labels", "reviewer", "timestamp"}.

    Later records for the same image supersede earlier ones. Labels must be
    vocabulary members; a bad record raises rather than silently shrinking
    a human verdict.
    """
    out: dict[str, frozenset[str]] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        obj = json.loads(line)
        labels = obj["labels"]
        for lbl in labels:
            if lbl not in vocab:
                raise ValueError(
                    f"{path}:{line_no}: verified label {lbl!r} is not in the vocabulary"
                )
        out[obj["image_id"]] = frozenset(labels)
    return out
