"""Brute-force reference implementations of the whole pipeline.

Everything here is written as plain nested loops over dicts and sets, with
no imports from the engine's aggregation or kernel code: these functions
are the comparison standard the optimized engine is tested against, so
clarity and independence beat speed. The softmax is the direct formula
without max-subtraction (safe at pipeline score magnitudes), which makes
it a genuine cross-check of the engine's stabilized version.

One shared convention keeps exact comparisons meaningful: method
contributions accumulate in the matrix's method order, and the full score
sums the same way. Tolerances (1e-9 on scores and likelihoods) absorb any
remaining last-ulp noise.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence, Set

from .aggregation import AggregationConfig
from .ingestion import PredictionMatrix

__all__ = [
    "MAX_METHODS",
    "MAX_LABELS",
    "MAX_IMAGES",
    "vote_counts",
    "estimate_accuracy",
    "pipeline",
]

MAX_METHODS = 12
MAX_LABELS = 64
MAX_IMAGES = 1000


def vote_counts(
    matrix: PredictionMatrix,
    images: Sequence[str],
    methods: Sequence[str],
) -> dict[str, dict[str, int]]:
    """Recount votes by iterating every (method, label) pair per image."""
    out: dict[str, dict[str, int]] = {}
    for image_id in images:
        counts: dict[str, int] = {}
        for label in matrix.vocab.labels:
            n = 0
            for method_id in methods:
                cell = matrix.cells[image_id].get(method_id)
                if cell is not None and label in cell.labels:
                    n += 1
            if n:
                counts[label] = n
        out[image_id] = counts
    return out


def estimate_accuracy(
    predictions: Mapping[str, Set[str]],
    ground_truth: Mapping[str, Set[str]],
    n: int,
    label_space_size: int,
) -> float:
    """Plain-formula accuracy estimate: coverage times over-prediction penalty."""
    gt_sum = sum(len(gt) for gt in ground_truth.values())
    hit_sum = sum(
        len(set(predictions.get(img, set())) & set(gt))
        for img, gt in ground_truth.items()
    )
    pred_sum = sum(
        len(predictions.get(img, set())) for img in ground_truth
    )
    coverage = hit_sum / gt_sum
    penalty = 1.0 - pred_sum / (n * label_space_size)
    if penalty < 0.0:
        penalty = 0.0
    return coverage * penalty


def pipeline(
    matrix: PredictionMatrix,
    weights: Mapping[str, float],
    cfg: AggregationConfig,
) -> list[dict]:
    """Exhaustive support / filter / softmax / diagnose, one image at a time.

    Returns, per image in universe order, a dict with image_id, original,
    entries (list of (label, score, likelihood) in rank order), and
    diagnosis. Instances beyond the documented bounds are refused; the
    brute force is quadratic-ish by design.
    """
    wanted = cfg.methods if cfg.methods else matrix.methods
    for m in wanted:
        if m not in weights:
            raise ValueError(f"method {m!r} has no weight")
    methods = [m for m in matrix.methods if m in set(wanted)]
    if len(methods) > MAX_METHODS:
        raise ValueError(f"instance too large: {len(methods)} methods > {MAX_METHODS}")
    if len(matrix.vocab) > MAX_LABELS:
        raise ValueError(f"instance too large: {len(matrix.vocab)} labels > {MAX_LABELS}")
    if len(matrix.images) > MAX_IMAGES:
        raise ValueError(f"instance too large: {len(matrix.images)} images > {MAX_IMAGES}")

    full = 0.0
    for method_id in methods:
        full += weights[method_id]
    if cfg.threshold_mode == "absolute":
        cutoff = cfg.threshold
    else:
        cutoff = cfg.threshold * full

    results = []
    for image_id in matrix.images:
        row = matrix.cells[image_id]
        scores: dict[str, float] = {}
        for label in matrix.vocab.labels:
            supported = False
            s = 0.0
            for method_id in methods:
                cell = row.get(method_id)
                if cell is not None and label in cell.labels:
                    supported = True
                    s += weights[method_id]
            if supported:
                scores[label] = s

        survivors = [
            (label, s) for label, s in scores.items() if s >= cutoff
        ]
        survivors.sort(key=lambda t: (-t[1], matrix.vocab.index_of(t[0])))
        survivors = survivors[: cfg.top_k]

        entries = []
        if survivors:
            denom = 0.0
            for _, s in survivors:
                denom += math.exp(s)
            for label, s in survivors:
                entries.append((label, s, math.exp(s) / denom))

        origin_cell = row.get(cfg.origin_method)
        original = origin_cell.labels[0]
        kept = {label for label, _, _ in entries}
        if not kept:
            tag = "unresolved"
        elif kept == {original}:
            tag = "clean"
        elif original in kept:
            tag = "missing_label"
        elif len(kept) == 1:
            tag = "noisy_label"
        else:
            tag = "noisy_and_missing"

        results.append(
            {
                "image_id": image_id,
                "original": original,
                "entries": entries,
                "diagnosis": tag,
            }
        )
    return results
