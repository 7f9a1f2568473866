"""Penalized accuracy estimation for each prediction method.

A method's estimated accuracy is the product of two terms over the
calibration slice:

    coverage = sum_j |pred_j intersect gt_j| / sum_j |gt_j|
    penalty  = 1 - sum_j |pred_j| / (n * |C|)

The penalty punishes indiscriminate over-prediction: a method that answers
with every label on every image covers everything and scores exactly zero.
The Full Score, the sum of all contributing methods' estimates, is the
ceiling any weighted support score can reach and the natural normalizer
for fraction-mode thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Set

from .errors import DegenerateGroundTruthError

__all__ = ["ExpertiseEstimate", "FullScore", "estimate_accuracy", "full_score"]


@dataclass(frozen=True)
class ExpertiseEstimate:
    """One method's penalized accuracy on the calibration slice."""

    method_id: str
    est_acc: float
    coverage_term: float
    penalty_term: float
    n: int
    label_space_size: int

    @classmethod
    def from_accuracy(cls, method_id: str, est_acc: float) -> "ExpertiseEstimate":
        """Wrap an externally reported accuracy (coverage = value, penalty = 1)."""
        return cls(
            method_id=method_id,
            est_acc=est_acc,
            coverage_term=est_acc,
            penalty_term=1.0,
            n=0,
            label_space_size=0,
        )


@dataclass(frozen=True)
class FullScore:
    """Sum of contributing methods' estimated accuracies."""

    dataset_id: str
    value: float
    methods: tuple[str, ...]


def estimate_accuracy(
    method_id: str,
    predictions: Mapping[str, Set[str]],
    ground_truth: Mapping[str, Set[str]],
    n: int,
    label_space_size: int,
) -> ExpertiseEstimate:
    """Estimate one method's accuracy against (effective) ground truth.

    ``ground_truth`` must cover the whole calibration slice; methods absent
    on some images contribute empty prediction sets there (a method may
    legally cover only part of a dataset). All-empty ground truth leaves
    coverage undefined and raises.
    """
    if n < 1:
        raise ValueError(f"calibration size must be >= 1, got {n}")
    if label_space_size < 1:
        raise ValueError(f"label space size must be >= 1, got {label_space_size}")
    gt_total = 0
    hit_total = 0
    pred_total = 0
    for image_id, gt in ground_truth.items():
        pred = predictions.get(image_id, frozenset())
        gt_total += len(gt)
        hit_total += len(set(pred) & set(gt))
        pred_total += len(pred)
    if gt_total == 0:
        raise DegenerateGroundTruthError(
            f"ground truth is empty on all {n} calibration images; coverage undefined"
        )
    coverage = hit_total / gt_total
    penalty = 1.0 - pred_total / (n * label_space_size)
    if penalty < 0.0:
        # only reachable with malformed input (predictions larger than the
        # label space); weights must stay non-negative for aggregation
        penalty = 0.0
    return ExpertiseEstimate(
        method_id=method_id,
        est_acc=coverage * penalty,
        coverage_term=coverage,
        penalty_term=penalty,
        n=n,
        label_space_size=label_space_size,
    )


def full_score(
    estimates: Sequence[ExpertiseEstimate],
    dataset_id: str = "",
) -> FullScore:
    """Arithmetic sum of the estimates; duplicate methods are an error."""
    if not estimates:
        raise ValueError("no expertise estimates to sum")
    seen: set[str] = set()
    total = 0.0
    for est in estimates:
        if est.method_id in seen:
            raise ValueError(f"duplicate method {est.method_id!r} in full score")
        seen.add(est.method_id)
        total += est.est_acc
    return FullScore(
        dataset_id=dataset_id,
        value=total,
        methods=tuple(e.method_id for e in estimates),
    )
