"""Weighted support scoring, filtering, soft labels, and diagnosis.

For each image, every contributing method's expertise weight is added to
the labels it predicted, giving a weighted support score per label. Labels
are then filtered by a cutoff (absolute, or a fraction of the Full Score)
and a top-k rank cut, and the survivors' scores are softmax-normalized
into likelihoods. Comparing the surviving set against the image's original
label classifies it as clean, noisy-label, missing-label, both, or
unresolved.

Filtering operates over the supported domain: only labels predicted by at
least one contributing method are candidates. A zero cutoff therefore
returns the supported labels, never the whole vocabulary.

The per-image arithmetic runs in the kernel lanes (compiled when built,
pure Python otherwise); both lanes are bit-identical, so run outputs do
not depend on which one is active.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import UnknownMethodError
from .expertise import ExpertiseEstimate, full_score
from .ingestion import PredictionMatrix
from .labelspace import LabelVocabulary

__all__ = [
    "THRESHOLD_ABSOLUTE",
    "THRESHOLD_FRACTION",
    "DIAGNOSES",
    "AggregationConfig",
    "SupportScores",
    "SoftLabelEntry",
    "SoftLabelSet",
    "RenovationReport",
    "weighted_support",
    "filter_labels",
    "softmax_normalize",
    "diagnose",
    "renovate",
]

THRESHOLD_ABSOLUTE = "absolute"
THRESHOLD_FRACTION = "fraction_of_full_score"

CLEAN = "clean"
NOISY = "noisy_label"
MISSING = "missing_label"
NOISY_AND_MISSING = "noisy_and_missing"
UNRESOLVED = "unresolved"
DIAGNOSES = (CLEAN, NOISY, MISSING, NOISY_AND_MISSING, UNRESOLVED)


@dataclass(frozen=True)
class AggregationConfig:
    """Filtering configuration for one renovation run.

    ``threshold_mode`` exists because published cutoffs appear as
    threshold/full-score pairs without saying which normalization applies;
    both readings are supported, fraction-of-full-score is the default.
    """

    threshold: float
    top_k: int
    threshold_mode: str = THRESHOLD_FRACTION
    methods: tuple[str, ...] = ()
    origin_method: str = "origin"

    def __post_init__(self) -> None:
        if self.threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")
        if self.threshold_mode not in (THRESHOLD_ABSOLUTE, THRESHOLD_FRACTION):
            raise ValueError(f"unknown threshold_mode {self.threshold_mode!r}")
        if self.threshold_mode == THRESHOLD_FRACTION and self.threshold > 1:
            raise ValueError(
                f"fraction-mode threshold must be <= 1, got {self.threshold}"
            )
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")

    def cutoff(self, full: float) -> float:
        """Resolve the effective score cutoff."""
        if self.threshold_mode == THRESHOLD_ABSOLUTE:
            return self.threshold
        if full <= 0:
            raise ValueError("fraction-mode threshold needs a positive full score")
        return self.threshold * full


@dataclass(frozen=True)
class SupportScores:
    """Per-image weighted support, sparse over labels anyone predicted."""

    vocab: LabelVocabulary
    scores: Mapping[str, Mapping[str, float]]

    def score(self, image_id: str, label: str) -> float:
        return self.scores[image_id].get(label, 0.0)


@dataclass(frozen=True)
class SoftLabelEntry:
    label: str
    score: float
    likelihood: float


@dataclass(frozen=True)
class SoftLabelSet:
    """Filtered labels with likelihoods, plus the image's diagnosis.

    Entries are ordered by score descending, vocabulary order on ties;
    likelihoods sum to one whenever any entry survived filtering.
    """

    image_id: str
    original_label: str
    entries: tuple[SoftLabelEntry, ...]
    diagnosis: str

    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.entries)


@dataclass(frozen=True)
class RenovationReport:
    """Dataset-level outcome summary mirroring the run configuration."""

    dataset_id: str
    image_count: int
    noisy_label_count: int
    missing_label_count: int
    threshold: float
    threshold_mode: str
    cutoff: float
    full_score: float
    top_k: int
    diagnosis_counts: Mapping[str, int]

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "image_count": self.image_count,
            "noisy_label_count": self.noisy_label_count,
            "missing_label_count": self.missing_label_count,
            "threshold": self.threshold,
            "threshold_mode": self.threshold_mode,
            "cutoff": self.cutoff,
            "full_score": self.full_score,
            "top_k": self.top_k,
            "diagnosis_counts": {d: self.diagnosis_counts[d] for d in DIAGNOSES},
        }


def _resolve_methods(
    matrix: PredictionMatrix,
    weights: Sequence[ExpertiseEstimate],
    restrict: Sequence[str] = (),
) -> tuple[tuple[str, ...], dict[str, float]]:
    """Contributing methods in matrix order and their weight lookup."""
    by_method = {}
    for est in weights:
        if est.method_id in by_method:
            raise ValueError(f"duplicate weight for method {est.method_id!r}")
        if est.est_acc < 0:
            raise ValueError(f"negative weight for method {est.method_id!r}")
        by_method[est.method_id] = est.est_acc
    wanted = tuple(restrict) if restrict else matrix.methods
    for m in wanted:
        if m not in matrix.methods:
            raise UnknownMethodError(f"method {m!r} not present in matrix")
        if m not in by_method:
            raise UnknownMethodError(f"method {m!r} has no expertise weight")
    # matrix order fixes the accumulation order, and with it the exact floats
    ordered = tuple(m for m in matrix.methods if m in set(wanted))
    return ordered, by_method


def _matrix_arrays(
    matrix: PredictionMatrix,
    methods: Sequence[str],
) -> tuple[np.ndarray, np.ndarray]:
    """Flatten (image, method) cells into CSR arrays of label indices."""
    vocab = matrix.vocab
    n_images = len(matrix.images)
    n_methods = len(methods)
    starts = np.zeros(n_images * n_methods + 1, dtype=np.int64)
    flat: list[int] = []
    pos = 0
    for j, image_id in enumerate(matrix.images):
        row = matrix.cells[image_id]
        for i, method_id in enumerate(methods):
            cell = row.get(method_id)
            if cell is not None:
                for lbl in cell.labels:
                    flat.append(vocab.index_of(lbl))
            pos += 1
            starts[pos] = len(flat)
    return starts, np.asarray(flat, dtype=np.int32)


def weighted_support(
    matrix: PredictionMatrix,
    weights: Sequence[ExpertiseEstimate],
    methods: Sequence[str] = (),
) -> SupportScores:
    """Sum expertise weights over the methods predicting each label.

    Weights are used as-is (no softmax over weights). The result is sparse:
    an image's map contains exactly the labels predicted by at least one
    contributing method, which may include zero scores when every
    predictor carried zero weight.
    """
    ordered, by_method = _resolve_methods(matrix, weights, methods)
    w = np.asarray([by_method[m] for m in ordered], dtype=np.float64)
    starts, flat = _matrix_arrays(matrix, ordered)
    sup_ptr, sup_labels, sup_scores = kernels.support_scores(
        w, starts, flat, len(matrix.images), len(matrix.vocab)
    )
    labels = matrix.vocab.labels
    out: dict[str, dict[str, float]] = {}
    for j, image_id in enumerate(matrix.images):
        lo, hi = int(sup_ptr[j]), int(sup_ptr[j + 1])
        out[image_id] = {
            labels[int(sup_labels[p])]: float(sup_scores[p]) for p in range(lo, hi)
        }
    return SupportScores(vocab=matrix.vocab, scores=out)


def filter_labels(
    scores: SupportScores,
    cfg: AggregationConfig,
    full: float,
) -> dict[str, list[str]]:
    """Apply the cutoff and top-k cut per image.

    Returns the surviving labels in rank order (score descending,
    vocabulary order on ties). Empty lists are legal; the caller diagnoses
    those images as unresolved.
    """
    cutoff = cfg.cutoff(full)
    vocab = scores.vocab
    out: dict[str, list[str]] = {}
    for image_id, per_label in scores.scores.items():
        passing = [
            (lbl, s) for lbl, s in per_label.items() if s >= cutoff
        ]
        passing.sort(key=lambda t: (-t[1], vocab.index_of(t[0])))
        out[image_id] = [lbl for lbl, _ in passing[: cfg.top_k]]
    return out


def softmax_normalize(scores: Mapping[str, float]) -> dict[str, float]:
    """Softmax over one image's filtered scores, max-subtracted for stability."""
    if not scores:
        raise ValueError("softmax over an empty label set is undefined")
    peak = max(scores.values())
    exps = {lbl: math.exp(s - peak) for lbl, s in scores.items()}
    denom = sum(exps.values())
    return {lbl: e / denom for lbl, e in exps.items()}


def diagnose(original_label: str, filtered: Sequence[str]) -> str:
    """Classify one image from its surviving labels versus its original label."""
    kept = set(filtered)
    if not kept:
        return UNRESOLVED
    if kept == {original_label}:
        return CLEAN
    if original_label in kept:
        return MISSING
    if len(kept) == 1:
        return NOISY
    return NOISY_AND_MISSING


def renovate(
    matrix: PredictionMatrix,
    weights: Sequence[ExpertiseEstimate],
    cfg: AggregationConfig,
) -> tuple[list[SoftLabelSet], RenovationReport]:
    """Run support scoring, filtering, normalization, and diagnosis.

    The original label for each image is taken from the matrix's origin
    method (``cfg.origin_method``), which must hold a non-empty cell for
    every image. Soft label sets come back in image-universe order. The
    report counts an image as noisy when its original label was rejected
    and as missing-label when extra labels survived; images with both
    conditions count in both totals.
    """
    contributing = cfg.methods if cfg.methods else ()
    ordered, by_method = _resolve_methods(matrix, weights, contributing)
    if cfg.origin_method not in matrix.methods:
        raise UnknownMethodError(
            f"origin method {cfg.origin_method!r} not present in matrix"
        )
    # sum in kernel method order so the fraction-mode cutoff is reproducible
    by_id = {e.method_id: e for e in weights}
    full = full_score([by_id[m] for m in ordered], matrix.dataset_id).value
    cutoff = cfg.cutoff(full)

    w = np.asarray([by_method[m] for m in ordered], dtype=np.float64)
    starts, flat = _matrix_arrays(matrix, ordered)
    sup_ptr, sup_labels, sup_scores = kernels.support_scores(
        w, starts, flat, len(matrix.images), len(matrix.vocab)
    )
    kept_ptr, kept_labels, kept_scores, kept_like = kernels.filter_topk_softmax(
        sup_ptr, sup_labels, sup_scores, cutoff, cfg.top_k
    )

    labels = matrix.vocab.labels
    soft: list[SoftLabelSet] = []
    counts = {d: 0 for d in DIAGNOSES}
    for j, image_id in enumerate(matrix.images):
        origin_cell = matrix.cells[image_id].get(cfg.origin_method)
        if origin_cell is None or not origin_cell.labels:
            raise ValueError(
                f"image {image_id!r} has no original label under method "
                f"{cfg.origin_method!r}"
            )
        original = origin_cell.labels[0]
        lo, hi = int(kept_ptr[j]), int(kept_ptr[j + 1])
        entries = tuple(
            SoftLabelEntry(
                label=labels[int(kept_labels[p])],
                score=float(kept_scores[p]),
                likelihood=float(kept_like[p]),
            )
            for p in range(lo, hi)
        )
        tag = diagnose(original, [e.label for e in entries])
        counts[tag] += 1
        soft.append(
            SoftLabelSet(
                image_id=image_id,
                original_label=original,
                entries=entries,
                diagnosis=tag,
            )
        )
    report = RenovationReport(
        dataset_id=matrix.dataset_id,
        image_count=len(matrix.images),
        noisy_label_count=counts[NOISY] + counts[NOISY_AND_MISSING],
        missing_label_count=counts[MISSING] + counts[NOISY_AND_MISSING],
        threshold=cfg.threshold,
        threshold_mode=cfg.threshold_mode,
        cutoff=cutoff,
        full_score=full,
        top_k=cfg.top_k,
        diagnosis_counts=counts,
    )
    return soft, report
