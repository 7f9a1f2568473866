"""Agreement with human annotations, label distributions, confusion grids.

The human-annotation records compare an image's original ("given") label
against an alternative ("guessed") label, with annotator counts over four
outcomes: given, guessed, both, neither. A prediction set agrees with a
record when it satisfies the consensus outcome's membership condition
(given means the given label must be predicted, neither means neither
label may appear, and so on). Consensus is the outcome with the highest
count; ties break by fixed precedence both > given > guessed > neither,
favoring the most informative reading.

Also here: per-method label-frequency distributions and pairwise confusion
grids between methods' primary labels, used to inspect prediction biases.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence, Set

from .errors import UnknownImageError, UnknownMethodError
from .ingestion import PredictionMatrix
from .labelspace import LabelVocabulary

__all__ = [
    "CASE_GIVEN",
    "CASE_GUESSED",
    "CASE_BOTH",
    "CASE_NEITHER",
    "MTurkRecord",
    "ConfusionMatrix",
    "consensus_case",
    "agrees",
    "agreement_rate",
    "label_distribution",
    "pairwise_confusion",
    "load_mturk_records",
    "write_distribution_csv",
]

CASE_GIVEN = "given"
CASE_GUESSED = "guessed"
CASE_BOTH = "both"
CASE_NEITHER = "neither"

# precedence for count ties, most informative first
_CASE_PRECEDENCE = (CASE_BOTH, CASE_GIVEN, CASE_GUESSED, CASE_NEITHER)


@dataclass(frozen=True)
class MTurkRecord:
    """One human-annotation record with its four outcome counts."""

    image_id: str
    given_label: str
    guessed_label: str
    counts: Mapping[str, int]

    def __post_init__(self) -> None:
        if self.given_label == self.guessed_label:
            raise ValueError(
                f"record {self.image_id!r}: given and guessed labels are identical"
            )
        for case in _CASE_PRECEDENCE:
            value = self.counts.get(case, 0)
            if value < 0:
                raise ValueError(f"record {self.image_id!r}: negative count for {case}")
        if all(self.counts.get(c, 0) == 0 for c in _CASE_PRECEDENCE):
            raise ValueError(f"record {self.image_id!r}: all outcome counts are zero")


def consensus_case(record: MTurkRecord) -> str:
    """The outcome with the highest count; precedence breaks ties."""
    best = None
    best_count = -1
    for case in _CASE_PRECEDENCE:
        value = record.counts.get(case, 0)
        if value > best_count:
            best = case
            best_count = value
    return best


def agrees(prediction: Set[str], record: MTurkRecord, case: str) -> bool:
    """Does the prediction set satisfy the consensus outcome's condition?"""
    g = record.given_label
    s = record.guessed_label
    if case == CASE_GIVEN:
        return g in prediction
    if case == CASE_GUESSED:
        return s in prediction
    if case == CASE_BOTH:
        return g in prediction and s in prediction
    if case == CASE_NEITHER:
        return g not in prediction and s not in prediction
    raise ValueError(f"unknown agreement case {case!r}")


def agreement_rate(
    predictions: Mapping[str, Set[str]],
    records: Sequence[MTurkRecord],
) -> float:
    """Fraction of records whose consensus condition the predictions satisfy.

    Every record's image must have a prediction set; an empty set is a
    legitimate prediction, a missing image is not.
    """
    if not records:
        raise ValueError("no records to evaluate agreement on")
    hits = 0
    for record in records:
        if record.image_id not in predictions:
            raise UnknownImageError(
                f"no prediction set for annotated image {record.image_id!r}"
            )
        case = consensus_case(record)
        if agrees(predictions[record.image_id], record, case):
            hits += 1
    return hits / len(records)


def load_mturk_records(path: str | Path, vocab: LabelVocabulary) -> list[MTurkRecord]:
    """Read annotation JSONL: {"image_id", "given", "guessed", "counts": {...}}."""
    out: list[MTurkRecord] = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        obj = json.loads(line)
        for key in ("given", "guessed"):
            if obj[key] not in vocab:
                raise ValueError(
                    f"{path}:{line_no}: label {obj[key]!r} is not in the vocabulary"
                )
        out.append(
            MTurkRecord(
                image_id=obj["image_id"],
                given_label=obj["given"],
                guessed_label=obj["guessed"],
                counts={c: int(obj["counts"].get(c, 0)) for c in _CASE_PRECEDENCE},
            )
        )
    return out


def label_distribution(matrix: PredictionMatrix, method_id: str) -> dict[str, int]:
    """Occurrences of each vocabulary label across all images, one method."""
    if method_id not in matrix.methods:
        raise UnknownMethodError(f"unknown method {method_id!r}")
    counts = {label: 0 for label in matrix.vocab.labels}
    for image_id in matrix.images:
        cell = matrix.cells[image_id].get(method_id)
        if cell is None:
            continue
        for label in cell.labels:
            counts[label] += 1
    return counts


@dataclass(frozen=True)
class ConfusionMatrix:
    """Primary-label confusion counts between two methods.

    Cell (r, c) counts images where the row method's primary label was
    labels[r] and the column method's was labels[c]. Only images where both
    methods produced non-empty predictions participate. The primary label
    is the highest-scored one when the cell carries scores, else the first
    in vocabulary order.
    """

    row_method: str
    col_method: str
    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def transpose(self) -> "ConfusionMatrix":
        n = len(self.labels)
        return ConfusionMatrix(
            row_method=self.col_method,
            col_method=self.row_method,
            labels=self.labels,
            counts=tuple(
                tuple(self.counts[r][c] for r in range(n)) for c in range(n)
            ),
        )

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"{self.row_method}\\{self.col_method}", *self.labels])
            for label, row in zip(self.labels, self.counts):
                writer.writerow([label, *row])


def _primary_label(cell, vocab: LabelVocabulary) -> str:
    if cell.scores:
        return max(
            cell.labels,
            key=lambda l: (cell.scores.get(l, float("-inf")), -vocab.index_of(l)),
        )
    return cell.labels[0]  # cells store labels in vocabulary order


def pairwise_confusion(
    matrix: PredictionMatrix,
    method_a: str,
    method_b: str,
) -> ConfusionMatrix:
    """Primary-label confusion grid for images both methods labeled."""
    for m in (method_a, method_b):
        if m not in matrix.methods:
            raise UnknownMethodError(f"unknown method {m!r}")
    vocab = matrix.vocab
    n = len(vocab)
    grid = [[0] * n for _ in range(n)]
    for image_id in matrix.images:
        row = matrix.cells[image_id]
        cell_a = row.get(method_a)
        cell_b = row.get(method_b)
        if cell_a is None or cell_b is None or not cell_a.labels or not cell_b.labels:
            continue
        ra = vocab.index_of(_primary_label(cell_a, vocab))
        rb = vocab.index_of(_primary_label(cell_b, vocab))
        grid[ra][rb] += 1
    return ConfusionMatrix(
        row_method=method_a,
        col_method=method_b,
        labels=vocab.labels,
        counts=tuple(tuple(r) for r in grid),
    )


def write_distribution_csv(
    counts: Mapping[str, int], method_id: str, path: str | Path
) -> None:
    """Two-column CSV of per-label occurrence counts."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", method_id])
        for label, value in counts.items():
            writer.writerow([label, value])
