"""Parsing, score filtering, and merging of per-method prediction files.

Input is JSONL, one record per line:

    {"image_id": str, "method": str, "labels": [str],
     "scores": {str: float}?, "raw": str?}

Labels pass through :func:`relabel.labelspace.sanitize_response`; score maps
are canonicalized against the vocabulary and restricted to kept labels at
merge time. Methods are open-world: any method string in the file registers
itself. The dataset's original labels are ingested as an ordinary method
(conventionally ``origin``) so they carry an expertise weight like every
other source.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    DuplicateCellError,
    MissingScoreError,
    PredictionsFileError,
    UnknownImageError,
    UnknownMethodError,
)
from .labelspace import LabelVocabulary, SanitizationReport, canonicalize, sanitize_response

__all__ = [
    "PredictionRecord",
    "PredictionMatrix",
    "ScoreFilterConfig",
    "ParseResult",
    "parse_predictions",
    "filter_scored",
    "merge",
    "load_image_universe",
]


@dataclass(frozen=True)
class PredictionRecord:
    """One method's sanitized prediction for one image."""

    image_id: str
    method_id: str
    labels: tuple[str, ...]
    scores: Optional[Mapping[str, float]] = None
    raw_response: Optional[str] = None


@dataclass(frozen=True)
class ScoreFilterConfig:
    """Threshold plus top-t cut for score-typed methods (the matching-score path)."""

    threshold: float
    top_t: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.top_t < 1:
            raise ValueError(f"top_t must be >= 1, got {self.top_t}")


@dataclass(frozen=True)
class ParseResult:
    """Everything learned from one predictions file."""

    records: tuple[PredictionRecord, ...]
    reports: tuple[tuple[int, SanitizationReport], ...]  # (line_no, report)
    errors: tuple[tuple[int, str], ...]  # (line_no, message)
    methods: tuple[str, ...]  # observed, sorted


def parse_predictions(
    lines: Iterable[str],
    vocab: LabelVocabulary,
    cap: Optional[int] = None,
) -> ParseResult:
    """Parse a predictions JSONL stream against a vocabulary.

    Malformed lines are collected with their line numbers and do not stop
    the parse, but a stream that is mostly garbage (more than half of its
    non-blank lines malformed) raises PredictionsFileError, since that
    almost always means the wrong file was supplied. ``cap`` bounds the
    accepted label list per record and defaults to the vocabulary size.
    """
    if cap is None:
        cap = len(vocab)
    records: list[PredictionRecord] = []
    reports: list[tuple[int, SanitizationReport]] = []
    errors: list[tuple[int, str]] = []
    methods: set[str] = set()
    total = 0
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        total += 1
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            errors.append((line_no, f"invalid JSON: {exc}"))
            continue
        problem = _validate_line(obj)
        if problem:
            errors.append((line_no, problem))
            continue
        report = sanitize_response(obj["labels"], vocab, cap)
        scores = _canonical_scores(obj.get("scores"), vocab)
        record = PredictionRecord(
            image_id=obj["image_id"],
            method_id=obj["method"],
            labels=report.accepted,
            scores=scores,
            raw_response=obj.get("raw"),
        )
        records.append(record)
        reports.append((line_no, report))
        methods.add(record.method_id)
    if total > 0 and len(errors) * 2 > total:
        raise PredictionsFileError(
            f"{len(errors)} of {total} lines malformed; this does not look like a predictions file"
        )
    return ParseResult(
        records=tuple(records),
        reports=tuple(reports),
        errors=tuple(errors),
        methods=tuple(sorted(methods)),
    )


def _validate_line(obj: object) -> Optional[str]:
    if not isinstance(obj, dict):
        return "record is not a JSON object"
    for key, kind in (("image_id", str), ("method", str)):
        if key not in obj:
            return f"missing field {key!r}"
        if not isinstance(obj[key], kind):
            return f"field {key!r} must be a string"
    labels = obj.get("labels")
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        return "field 'labels' must be an array of strings"
    scores = obj.get("scores")
    if scores is not None:
        if not isinstance(scores, dict):
            return "field 'scores' must be an object"
        for k, v in scores.items():
            if not isinstance(k, str) or not isinstance(v, (int, float)) or isinstance(v, bool):
                return "field 'scores' must map strings to numbers"
    raw = obj.get("raw")
    if raw is not None and not isinstance(raw, str):
        return "field 'raw' must be a string"
    return None


def _canonical_scores(
    scores: Optional[Mapping[str, float]], vocab: LabelVocabulary
) -> Optional[dict[str, float]]:
    """Canonicalize score keys, dropping out-of-vocabulary ones. First key wins on collision."""
    if scores is None:
        return None
    out: dict[str, float] = {}
    for raw_key, value in scores.items():
        label = canonicalize(raw_key, vocab)
        if label is not None and label not in out:
            out[label] = float(value)
    return out


def filter_scored(
    record: PredictionRecord,
    cfg: ScoreFilterConfig,
    vocab: LabelVocabulary,
) -> PredictionRecord:
    """Keep labels scoring at least the threshold, then the top-t of those.

    Ties at the top-t boundary break by vocabulary order. Output scores are
    restricted to the kept labels. Every label of the record must carry a
    score; one without is unrankable and raises MissingScoreError.
    """
    if record.scores is None:
        raise MissingScoreError(
            f"record ({record.image_id!r}, {record.method_id!r}) has no scores to filter on"
        )
    for label in record.labels:
        if label not in record.scores:
            raise MissingScoreError(
                f"label {label!r} of image {record.image_id!r} carries no score"
            )
    passing = [lbl for lbl in record.labels if record.scores[lbl] >= cfg.threshold]
    ranked = sorted(passing, key=lambda lbl: (-record.scores[lbl], vocab.index_of(lbl)))
    kept = ranked[: cfg.top_t]
    kept_in_input_order = tuple(lbl for lbl in record.labels if lbl in set(kept))
    return PredictionRecord(
        image_id=record.image_id,
        method_id=record.method_id,
        labels=kept_in_input_order,
        scores={lbl: record.scores[lbl] for lbl in kept_in_input_order},
        raw_response=record.raw_response,
    )


@dataclass(frozen=True)
class Cell:
    """Label set (vocabulary order) one method predicted for one image."""

    labels: tuple[str, ...] = ()
    scores: Optional[Mapping[str, float]] = None


_EMPTY_CELL = Cell()


@dataclass(frozen=True)
class PredictionMatrix:
    """Per-image, per-method predicted label sets over one image universe.

    Every (image, method) cell exists; absence of a record is an empty
    cell, which is legal and meaningful (a method may abstain). Methods are
    kept sorted so the matrix is identical no matter the order records
    arrived in.
    """

    dataset_id: str
    vocab: LabelVocabulary
    images: tuple[str, ...]
    methods: tuple[str, ...]
    cells: Mapping[str, Mapping[str, Cell]] = field(repr=False)

    def cell(self, image_id: str, method_id: str) -> Cell:
        if method_id not in self._method_set():
            raise UnknownMethodError(f"unknown method {method_id!r}")
        try:
            row = self.cells[image_id]
        except KeyError:
            raise UnknownImageError(f"unknown image {image_id!r}") from None
        return row.get(method_id, _EMPTY_CELL)

    def labels_for(self, image_id: str, method_id: str) -> tuple[str, ...]:
        return self.cell(image_id, method_id).labels

    def _method_set(self) -> frozenset[str]:
        # tiny, recomputed on demand; matrices are built once and read many times
        return frozenset(self.methods)

    def to_records(self) -> list[PredictionRecord]:
        """Flatten back to records, sorted by (image_id, method); empty cells omitted."""
        out: list[PredictionRecord] = []
        for image_id in sorted(self.images):
            row = self.cells[image_id]
            for method_id in sorted(self.methods):
                cell = row.get(method_id, _EMPTY_CELL)
                if not cell.labels:
                    continue
                out.append(
                    PredictionRecord(
                        image_id=image_id,
                        method_id=method_id,
                        labels=cell.labels,
                        scores=cell.scores,
                    )
                )
        return out

    def write_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.to_records():
                obj: dict = {
                    "image_id": rec.image_id,
                    "method": rec.method_id,
                    "labels": list(rec.labels),
                }
                if rec.scores is not None:
                    obj["scores"] = {lbl: rec.scores[lbl] for lbl in rec.labels}
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def merge(
    records: Sequence[PredictionRecord],
    image_universe: Sequence[str],
    vocab: LabelVocabulary,
    dataset_id: str = "",
) -> PredictionMatrix:
    """Fold sanitized records into a complete matrix over the universe.

    Deterministic and order-independent: cells are normalized to vocabulary
    order and methods sorted, so permuting the input records yields an
    identical matrix. Duplicate (image, method) records raise; records for
    images outside the universe raise (mismatched files).
    """
    universe = tuple(image_universe)
    known = set(universe)
    if len(known) != len(universe):
        raise UnknownImageError("image universe contains duplicates")
    methods: set[str] = set()
    cells: dict[str, dict[str, Cell]] = {img: {} for img in universe}
    for rec in records:
        if rec.image_id not in known:
            raise UnknownImageError(
                f"record image {rec.image_id!r} is not in the image universe"
            )
        methods.add(rec.method_id)
        row = cells[rec.image_id]
        if rec.method_id in row:
            raise DuplicateCellError(rec.image_id, rec.method_id)
        ordered = tuple(vocab.sort_labels(rec.labels))
        scores = None
        if rec.scores is not None:
            scores = {lbl: rec.scores[lbl] for lbl in ordered if lbl in rec.scores}
        row[rec.method_id] = Cell(labels=ordered, scores=scores)
    return PredictionMatrix(
        dataset_id=dataset_id or vocab.dataset_id,
        vocab=vocab,
        images=universe,
        methods=tuple(sorted(methods)),
        cells=cells,
    )


def load_image_universe(path: str | Path) -> tuple[str, ...]:
    """Read a newline-delimited image_id file, preserving order."""
    ids = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    return tuple(i for i in ids if i)
