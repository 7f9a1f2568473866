"""Synthetic datasets with planted truth for end-to-end validation.

Simulated predictors emit each true label independently with their planted
accuracy and pad with uniformly drawn spurious labels up to their volume
bias, so the pipeline's expertise estimates and renovated label sets can
be scored against a known answer. Generation is a pure function of the
spec (seed included); reproducibility outranks speed here, so everything
is single-threaded plain Python.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .aggregation import AggregationConfig, SoftLabelSet, renovate
from .expertise import estimate_accuracy
from .ingestion import Cell, PredictionMatrix
from .labelspace import LabelVocabulary
from .voting import CalibrationSet, effective_ground_truth, majority_threshold, pseudo_ground_truth, tally_votes

__all__ = [
    "SimulatedMethod",
    "SyntheticSpec",
    "PlantedTruth",
    "RecoveryReport",
    "generate",
    "recovery_metrics",
    "run_recovery",
    "recovery_experiment",
    "spearman_rank_correlation",
    "default_spec",
]

ORIGIN_METHOD = "origin"


@dataclass(frozen=True)
class SimulatedMethod:
    """A predictor with a planted per-label hit rate and a volume target."""

    accuracy: float
    volume_bias: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must be in [0, 1], got {self.accuracy}")
        if self.volume_bias < 0:
            raise ValueError(f"volume_bias must be >= 0, got {self.volume_bias}")


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape of one synthetic instance."""

    seed: int
    image_count: int
    label_space_size: int
    methods: tuple[SimulatedMethod, ...]
    multi_label_fraction: float = 0.0
    noisy_original_fraction: float = 0.0

    def __post_init__(self) -> None:
        if self.image_count < 1 or self.label_space_size < 1:
            raise ValueError("image_count and label_space_size must be >= 1")
        if not self.methods:
            raise ValueError("at least one simulated method is required")
        for frac in (self.multi_label_fraction, self.noisy_original_fraction):
            if not 0.0 <= frac <= 1.0:
                raise ValueError(f"fractions must be in [0, 1], got {frac}")

    @classmethod
    def from_json(cls, path: str | Path) -> "SyntheticSpec":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            seed=int(obj["seed"]),
            image_count=int(obj["image_count"]),
            label_space_size=int(obj["label_space_size"]),
            methods=tuple(
                SimulatedMethod(accuracy=float(m["accuracy"]), volume_bias=float(m["volume_bias"]))
                for m in obj["methods"]
            ),
            multi_label_fraction=float(obj.get("multi_label_fraction", 0.0)),
            noisy_original_fraction=float(obj.get("noisy_original_fraction", 0.0)),
        )


@dataclass(frozen=True)
class PlantedTruth:
    """What each image really contains, and the corrupted single original."""

    truth: Mapping[str, frozenset[str]]
    originals: Mapping[str, str]


def _method_id(i: int) -> str:
    return f"sim{i:02d}"


def generate(spec: SyntheticSpec) -> tuple[PlantedTruth, PredictionMatrix]:
    """Build the planted truth and a prediction matrix (origin included).

    Per image and simulated method: each true label is emitted with the
    planted accuracy; spurious labels (uniform over non-true labels) top
    the set up to a stochastically rounded volume target. The origin
    method holds the possibly corrupted single original label per image.
    """
    rng = random.Random(spec.seed)
    labels = tuple(f"class_{i:03d}" for i in range(spec.label_space_size))
    vocab = LabelVocabulary.create(f"synthetic-{spec.seed}", labels)
    images = tuple(f"img_{j:05d}" for j in range(spec.image_count))

    truth: dict[str, frozenset[str]] = {}
    originals: dict[str, str] = {}
    for image_id in images:
        size = 2 if (spec.label_space_size > 1 and rng.random() < spec.multi_label_fraction) else 1
        true_set = frozenset(rng.sample(labels, size))
        truth[image_id] = true_set
        non_true = [l for l in labels if l not in true_set]
        if non_true and rng.random() < spec.noisy_original_fraction:
            originals[image_id] = rng.choice(non_true)
        else:
            originals[image_id] = rng.choice(sorted(true_set))

    cells: dict[str, dict[str, Cell]] = {img: {} for img in images}
    for i, method in enumerate(spec.methods):
        method_id = _method_id(i)
        for image_id in images:
            true_sorted = vocab.sort_labels(truth[image_id])
            included = [l for l in true_sorted if rng.random() < method.accuracy]
            whole = math.floor(method.volume_bias)
            frac = method.volume_bias - whole
            target = whole + (1 if rng.random() < frac else 0)
            non_true = [l for l in vocab.labels if l not in truth[image_id]]
            n_spurious = min(max(0, target - len(included)), len(non_true))
            spurious = rng.sample(non_true, n_spurious) if n_spurious else []
            cells[image_id][method_id] = Cell(
                labels=tuple(vocab.sort_labels(included + spurious))
            )
    for image_id in images:
        cells[image_id][ORIGIN_METHOD] = Cell(labels=(originals[image_id],))

    matrix = PredictionMatrix(
        dataset_id=vocab.dataset_id,
        vocab=vocab,
        images=images,
        methods=tuple(sorted([_method_id(i) for i in range(len(spec.methods))] + [ORIGIN_METHOD])),
        cells=cells,
    )
    return PlantedTruth(truth=truth, originals=originals), matrix


def spearman_rank_correlation(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Spearman's rho with average ranks for ties; None when degenerate.

    Degenerate means fewer than two points or zero variance on either
    side (all predictors identical), where a ranking simply does not exist.
    """
    if len(xs) != len(ys):
        raise ValueError("rank correlation needs paired sequences")
    n = len(xs)
    if n < 2:
        return None

    def average_ranks(values: Sequence[float]) -> list[float]:
        order = sorted(range(n), key=lambda i: values[i])
        ranks = [0.0] * n
        i = 0
        while i < n:
            j = i
            while j + 1 < n and values[order[j + 1]] == values[order[i]]:
                j += 1
            avg = (i + j) / 2 + 1
            for p in range(i, j + 1):
                ranks[order[p]] = avg
            i = j + 1
        return ranks

    rx = average_ranks(xs)
    ry = average_ranks(ys)
    mean_x = sum(rx) / n
    mean_y = sum(ry) / n
    cov = sum((a - mean_x) * (b - mean_y) for a, b in zip(rx, ry))
    var_x = sum((a - mean_x) ** 2 for a in rx)
    var_y = sum((b - mean_y) ** 2 for b in ry)
    if var_x == 0.0 or var_y == 0.0:
        return None
    return cov / math.sqrt(var_x * var_y)


@dataclass(frozen=True)
class RecoveryReport:
    """How well one synthetic run recovered what was planted."""

    seed: int
    spearman: Optional[float]
    planted_accuracies: tuple[float, ...]
    estimated_accuracies: tuple[float, ...]
    ensemble_recall: float
    ensemble_precision: float
    best_single_recall: float
    per_method_recall: Mapping[str, float]
    ensemble_beats_best: bool

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "spearman": self.spearman,
            "planted_accuracies": list(self.planted_accuracies),
            "estimated_accuracies": list(self.estimated_accuracies),
            "ensemble_recall": self.ensemble_recall,
            "ensemble_precision": self.ensemble_precision,
            "best_single_recall": self.best_single_recall,
            "per_method_recall": dict(self.per_method_recall),
            "ensemble_beats_best": self.ensemble_beats_best,
        }


def _set_recall(
    predicted: Mapping[str, frozenset[str]], truth: Mapping[str, frozenset[str]]
) -> float:
    ref = sum(len(t) for t in truth.values())
    hit = sum(len(set(predicted.get(img, frozenset())) & t) for img, t in truth.items())
    return hit / ref if ref else 0.0


def recovery_metrics(
    spec: SyntheticSpec,
    planted: PlantedTruth,
    matrix: PredictionMatrix,
    estimates,
    soft_labels: Sequence[SoftLabelSet],
) -> RecoveryReport:
    """Score estimated expertise and renovated labels against the plant."""
    sim_ids = [_method_id(i) for i in range(len(spec.methods))]
    by_id = {e.method_id: e for e in estimates}
    planted_accs = tuple(m.accuracy for m in spec.methods)
    estimated = tuple(by_id[mid].est_acc for mid in sim_ids)

    renovated = {s.image_id: frozenset(s.labels()) for s in soft_labels}
    ens_recall = _set_recall(renovated, planted.truth)
    pred_total = sum(len(v) for v in renovated.values())
    hit_total = sum(
        len(v & planted.truth[img]) for img, v in renovated.items()
    )
    ens_precision = hit_total / pred_total if pred_total else 0.0

    per_method = {}
    for mid in sim_ids:
        preds = {
            img: frozenset(matrix.cells[img][mid].labels) for img in matrix.images
        }
        per_method[mid] = _set_recall(preds, planted.truth)
    best = max(per_method.values())
    return RecoveryReport(
        seed=spec.seed,
        spearman=spearman_rank_correlation(planted_accs, estimated),
        planted_accuracies=planted_accs,
        estimated_accuracies=estimated,
        ensemble_recall=ens_recall,
        ensemble_precision=ens_precision,
        best_single_recall=best,
        per_method_recall=per_method,
        ensemble_beats_best=ens_recall >= best,
    )


def run_recovery(
    spec: SyntheticSpec,
    cfg: Optional[AggregationConfig] = None,
    vote_threshold: Optional[int] = None,
) -> RecoveryReport:
    """Generate an instance, run the full pipeline on it, score the outcome.

    Calibration is the whole generated universe (synthetic instances are
    calibration-sized by construction). The vote threshold defaults to a
    strict majority of the participating methods, origin included.
    """
    planted, matrix = generate(spec)
    if cfg is None:
        cfg = AggregationConfig(threshold=0.25, top_k=3)
    cal = CalibrationSet.first_n(matrix.images, n=len(matrix.images))
    tally = tally_votes(matrix, cal.image_ids)
    k = vote_threshold if vote_threshold is not None else majority_threshold(tally.method_count)
    pgt = pseudo_ground_truth(tally, k)
    gt = effective_ground_truth(pgt, cal)
    estimates = [
        estimate_accuracy(
            method_id,
            {img: frozenset(matrix.cells[img][method_id].labels) for img in cal.image_ids},
            gt,
            n=len(cal.image_ids),
            label_space_size=len(matrix.vocab),
        )
        for method_id in matrix.methods
    ]
    soft, _report = renovate(matrix, estimates, cfg)
    return recovery_metrics(spec, planted, matrix, estimates, soft)


def default_spec(seed: int) -> SyntheticSpec:
    """Default recovery instance: six predictors spread over [0.3, 0.95]."""
    accs = [0.3, 0.43, 0.56, 0.69, 0.82, 0.95]
    return SyntheticSpec(
        seed=seed,
        image_count=100,
        label_space_size=50,
        methods=tuple(SimulatedMethod(accuracy=a, volume_bias=2.0) for a in accs),
        multi_label_fraction=0.3,
        noisy_original_fraction=0.1,
    )


def recovery_experiment(
    n_seeds: int = 20,
    base_seed: int = 1000,
    cfg: Optional[AggregationConfig] = None,
) -> list[RecoveryReport]:
    """Run the default recovery instance across seeds."""
    return [run_recovery(default_spec(base_seed + s), cfg=cfg) for s in range(n_seeds)]
