"""Run orchestration: config loading, pipeline execution, output files.

A run is a pure function of its inputs, configuration, and seed: ingest
the per-method prediction files, vote pseudo ground truth on the
calibration slice, apply any human verdicts, estimate expertise, aggregate
into soft labels, diagnose, and write the output set. Outputs are
byte-identical across reruns; everything is serialized in image-universe
or explicitly sorted order and the manifest records the config hash and
seed rather than anything time-dependent.

Failures during the pipeline produce a machine-readable ``error.json`` in
the output directory and a non-zero exit from the CLI; configuration
problems (missing files, bad parameters) are raised before anything is
written at all.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .aggregation import AggregationConfig, RenovationReport, SoftLabelSet, renovate
from .errors import ConfigError, RenovationError
from .expertise import ExpertiseEstimate, FullScore, estimate_accuracy, full_score
from .ingestion import (
    PredictionMatrix,
    ScoreFilterConfig,
    filter_scored,
    load_image_universe,
    merge,
    parse_predictions,
)
from .labelspace import LabelVocabulary
from .voting import (
    CalibrationSet,
    PseudoGroundTruth,
    effective_ground_truth,
    majority_threshold,
    pseudo_ground_truth,
    tally_votes,
)

__all__ = [
    "MethodSource",
    "RunConfig",
    "PipelineState",
    "load_config",
    "run",
    "apply_verdicts",
    "OUTPUT_FILES",
]

OUTPUT_FILES = (
    "expertise.json",
    "soft_labels.jsonl",
    "report.json",
    "ingest_report.json",
    "manifest.json",
)


@dataclass(frozen=True)
class MethodSource:
    """One prediction file and how to ingest it."""

    method_id: str
    path: Path
    cap: Optional[int] = None
    score_filter: Optional[ScoreFilterConfig] = None


@dataclass(frozen=True)
class RunConfig:
    """Everything a renovation run needs, resolved and validated."""

    dataset_id: str
    vocabulary_path: Path
    image_universe_path: Path
    sources: tuple[MethodSource, ...]
    aggregation: AggregationConfig
    output_dir: Path
    seed: int = 0
    calibration_size: int = 100
    vote_threshold: Optional[int] = None  # None -> strict majority
    verdicts_path: Optional[Path] = None
    images_dir: Optional[Path] = None
    raw: Mapping = field(default_factory=dict, repr=False)

    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def load_config(path: str | Path) -> RunConfig:
    """Load and validate a run-config JSON file.

    Relative paths resolve against the config file's directory. Every
    referenced input must exist; this is the fail-fast gate before a run
    writes anything.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = path.parent

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else base / candidate

    try:
        dataset_id = raw["dataset_id"]
        vocab_path = resolve(raw["vocabulary"])
        universe_path = resolve(raw["image_universe"])
        sources_raw = raw["predictions"]
        agg_raw = raw["aggregation"]
        output_dir = resolve(raw["output_dir"])
    except KeyError as exc:
        raise ConfigError(f"config {path} is missing required key {exc}") from exc

    sources = []
    seen_methods = set()
    for entry in sources_raw:
        method_id = entry["method"]
        if method_id in seen_methods:
            raise ConfigError(f"method {method_id!r} appears twice in predictions")
        seen_methods.add(method_id)
        sf = None
        if "score_filter" in entry:
            sf = ScoreFilterConfig(
                threshold=float(entry["score_filter"]["threshold"]),
                top_t=int(entry["score_filter"]["top_t"]),
            )
        sources.append(
            MethodSource(
                method_id=method_id,
                path=resolve(entry["path"]),
                cap=int(entry["cap"]) if "cap" in entry else None,
                score_filter=sf,
            )
        )

    try:
        aggregation = AggregationConfig(
            threshold=float(agg_raw["threshold"]),
            top_k=int(agg_raw["top_k"]),
            threshold_mode=agg_raw.get("threshold_mode", "fraction_of_full_score"),
            methods=tuple(agg_raw.get("methods", ())),
            origin_method=agg_raw.get("origin_method", "origin"),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad aggregation config: {exc}") from exc

    config = RunConfig(
        dataset_id=dataset_id,
        vocabulary_path=vocab_path,
        image_universe_path=universe_path,
        sources=tuple(sources),
        aggregation=aggregation,
        output_dir=output_dir,
        seed=int(raw.get("seed", 0)),
        calibration_size=int(raw.get("calibration_size", 100)),
        vote_threshold=int(raw["vote_threshold"]) if "vote_threshold" in raw else None,
        verdicts_path=resolve(raw["verdicts"]) if "verdicts" in raw else None,
        images_dir=resolve(raw["images_dir"]) if "images_dir" in raw else None,
        raw=raw,
    )
    _validate_inputs(config)
    return config


def _validate_inputs(config: RunConfig) -> None:
    missing = [
        str(p)
        for p in [config.vocabulary_path, config.image_universe_path]
        + [s.path for s in config.sources]
        if not p.is_file()
    ]
    if missing:
        raise ConfigError(f"missing input files: {', '.join(missing)}")
    if config.calibration_size < 1:
        raise ConfigError("calibration_size must be >= 1")
    if not config.sources:
        raise ConfigError("no prediction files configured")


@dataclass
class PipelineState:
    """Everything a completed (in-memory) run knows."""

    config: RunConfig
    vocab: LabelVocabulary
    matrix: PredictionMatrix
    calibration: CalibrationSet
    pgt: PseudoGroundTruth
    ground_truth: dict[str, frozenset[str]]
    estimates: list[ExpertiseEstimate]
    full: FullScore
    soft_labels: list[SoftLabelSet]
    report: RenovationReport
    ingest_summary: list[dict]
    verdict_warnings: list[str]


def ingest(config: RunConfig) -> tuple[LabelVocabulary, PredictionMatrix, list[dict]]:
    """Parse and merge every configured prediction file."""
    vocab = LabelVocabulary.from_json(config.vocabulary_path)
    universe = load_image_universe(config.image_universe_path)
    if not universe:
        raise ConfigError(f"image universe {config.image_universe_path} is empty")
    records = []
    summary = []
    for source in config.sources:
        with open(source.path, encoding="utf-8") as fh:
            result = parse_predictions(fh, vocab, cap=source.cap)
        file_records = list(result.records)
        if source.score_filter is not None:
            file_records = [
                filter_scored(rec, source.score_filter, vocab) for rec in file_records
            ]
        records.extend(file_records)
        summary.append(
            {
                "method": source.method_id,
                "path": str(source.path),
                "records": len(file_records),
                "line_errors": [
                    {"line": line_no, "message": msg} for line_no, msg in result.errors
                ],
                "rejected_out_of_vocab": sum(
                    len(rep.rejected_out_of_vocab) for _, rep in result.reports
                ),
                "duplicates_removed": sum(
                    rep.duplicates_removed for _, rep in result.reports
                ),
                "truncated_lines": sum(1 for _, rep in result.reports if rep.truncated),
                "null_responses": sum(1 for _, rep in result.reports if rep.was_null),
            }
        )
    matrix = merge(records, universe, vocab, dataset_id=config.dataset_id)
    return vocab, matrix, summary


def apply_verdicts(
    lines: Sequence[str],
    vocab: LabelVocabulary,
) -> tuple[dict[str, frozenset[str]], list[str]]:
    """Fold an append-only verdict log into per-image verified sets.

    The latest verdict per image wins (timestamp, then file order).
    Corrupt lines are skipped with a warning instead of poisoning the log;
    verdicts carrying out-of-vocabulary labels are rejected the same way.
    """
    best: dict[str, tuple[str, int, frozenset[str]]] = {}
    warnings: list[str] = []
    for line_no, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            image_id = obj["image_id"]
            labels = obj["labels"]
            timestamp = obj.get("timestamp", "")
            if not isinstance(labels, list):
                raise ValueError("labels must be a list")
            bad = [l for l in labels if l not in vocab]
            if bad:
                raise ValueError(f"labels not in vocabulary: {bad}")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            warnings.append(f"verdict line {line_no} skipped: {exc}")
            continue
        key = (timestamp, line_no)
        if image_id not in best or key >= (best[image_id][0], best[image_id][1]):
            best[image_id] = (timestamp, line_no, frozenset(labels))
    return {img: labels for img, (_, _, labels) in best.items()}, warnings


def compute(
    config: RunConfig,
    vocab: LabelVocabulary,
    matrix: PredictionMatrix,
    verified: Optional[Mapping[str, frozenset[str]]] = None,
) -> tuple[
    CalibrationSet,
    PseudoGroundTruth,
    dict[str, frozenset[str]],
    list[ExpertiseEstimate],
    FullScore,
    list[SoftLabelSet],
    RenovationReport,
]:
    """Vote, apply verdicts, estimate expertise, aggregate, diagnose."""
    contributing = config.aggregation.methods or matrix.methods
    calibration = CalibrationSet.first_n(
        matrix.images, n=min(config.calibration_size, len(matrix.images)), verified=verified
    )
    tally = tally_votes(matrix, calibration.image_ids, methods=contributing)
    k = (
        config.vote_threshold
        if config.vote_threshold is not None
        else majority_threshold(tally.method_count)
    )
    pgt = pseudo_ground_truth(tally, k)
    ground_truth = effective_ground_truth(pgt, calibration)
    estimates = [
        _estimate_for(matrix, method_id, calibration, ground_truth)
        for method_id in contributing
    ]
    full = full_score(estimates, config.dataset_id)
    soft, report = renovate(matrix, estimates, config.aggregation)
    return calibration, pgt, ground_truth, estimates, full, soft, report


def _estimate_for(matrix, method_id, calibration, ground_truth):
    predictions = {}
    for image_id in calibration.image_ids:
        cell = matrix.cells[image_id].get(method_id)
        predictions[image_id] = frozenset(cell.labels) if cell is not None else frozenset()
    return estimate_accuracy(
        method_id,
        predictions,
        ground_truth,
        n=len(calibration.image_ids),
        label_space_size=len(matrix.vocab),
    )


def build_state(config: RunConfig) -> PipelineState:
    """Execute the pipeline in memory without touching the output dir."""
    vocab, matrix, ingest_summary = ingest(config)
    verified: dict[str, frozenset[str]] = {}
    warnings: list[str] = []
    if config.verdicts_path is not None and config.verdicts_path.is_file():
        lines = config.verdicts_path.read_text(encoding="utf-8").splitlines()
        verified, warnings = apply_verdicts(lines, vocab)
    calibration, pgt, ground_truth, estimates, full, soft, report = compute(
        config, vocab, matrix, verified
    )
    return PipelineState(
        config=config,
        vocab=vocab,
        matrix=matrix,
        calibration=calibration,
        pgt=pgt,
        ground_truth=ground_truth,
        estimates=estimates,
        full=full,
        soft_labels=soft,
        report=report,
        ingest_summary=ingest_summary,
        verdict_warnings=warnings,
    )


def write_outputs(state: PipelineState) -> None:
    """Serialize the expertise report, soft labels, report, and manifest."""
    out = state.config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    _write_json(
        out / "expertise.json",
        {
            "dataset_id": state.config.dataset_id,
            "estimates": [
                {
                    "method": e.method_id,
                    "est_acc": e.est_acc,
                    "coverage": e.coverage_term,
                    "penalty": e.penalty_term,
                }
                for e in state.estimates
            ],
            "full_score": state.full.value,
        },
    )
    with open(out / "soft_labels.jsonl", "w", encoding="utf-8") as fh:
        for soft in state.soft_labels:
            fh.write(json.dumps(soft_label_to_dict(soft), ensure_ascii=False) + "\n")
    _write_json(out / "report.json", state.report.to_dict())
    _write_json(
        out / "ingest_report.json",
        {"files": state.ingest_summary, "verdict_warnings": state.verdict_warnings},
    )
    _write_json(
        out / "manifest.json",
        {
            "dataset_id": state.config.dataset_id,
            "config_hash": state.config.config_hash(),
            "seed": state.config.seed,
        },
    )


def soft_label_to_dict(soft: SoftLabelSet) -> dict:
    return {
        "image_id": soft.image_id,
        "original": soft.original_label,
        "labels": [
            {"label": e.label, "score": e.score, "likelihood": e.likelihood}
            for e in soft.entries
        ],
        "diagnosis": soft.diagnosis,
    }


def run(config: RunConfig) -> PipelineState:
    """Execute a full run and write its outputs.

    Pipeline errors leave a machine-readable ``error.json`` in the output
    directory before re-raising; configuration errors surface before any
    write happens (callers validate via :func:`load_config`).
    """
    try:
        state = build_state(config)
    except RenovationError as exc:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        _write_json(
            config.output_dir / "error.json",
            {"error": type(exc).__name__, "message": str(exc)},
        )
        raise
    write_outputs(state)
    return state


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
