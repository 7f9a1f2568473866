"""Label-batch planning, prompt rendering, and response-quality evaluation.

Large label sets cannot be offered to a model in one prompt without recall
collapsing, and alphabetical label order biases what models pick. Plans
therefore shuffle the vocabulary with a seeded, portable generator and
chunk it into batches; one prompt per batch per image for the batched
strategy, one yes/no prompt per label for binary questioning, a single
prompt for direct selection.

The shuffle is a Fisher-Yates permutation driven by splitmix64, chosen
because both pieces are specified exactly and reproduce identically in any
language. Plans with the same seed are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence, Set

from .labelspace import LabelVocabulary

__all__ = [
    "KIND_BINARY",
    "KIND_DIRECT",
    "KIND_BATCHED",
    "PromptPlan",
    "PromptEvalResult",
    "plan_batches",
    "build_plan",
    "render_prompt",
    "evaluate_responses",
    "template_text",
]

KIND_BINARY = "binary"
KIND_DIRECT = "direct"
KIND_BATCHED = "batched"
KINDS = (KIND_BINARY, KIND_DIRECT, KIND_BATCHED)

_LABEL_NAME_SLOT = "<label name>"
_CANDIDATES_SLOT = "<label candidate list>"
_PREAMBLE = "Please follow the instructions with no exceptions."

# published per-dataset label/prompt batch sizes
DEFAULT_BATCH_SIZES = {
    "cifar10": 10,
    "cifar100": 20,
    "caltech256": 50,
    "imagenet1k": 67,
    "quickdraw": 60,
    "mnist": 10,
}


def _splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    mask = (1 << 64) - 1
    state = (state + 0x9E3779B97F4A7C15) & mask
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    z = z ^ (z >> 31)
    return state, z


def _shuffled(items: Sequence[str], seed: int) -> list[str]:
    """Fisher-Yates with splitmix64 draws; swap index is output mod (i+1)."""
    out = list(items)
    state = seed & ((1 << 64) - 1)
    for i in range(len(out) - 1, 0, -1):
        state, z = _splitmix64(state)
        j = z % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


@dataclass(frozen=True)
class PromptPlan:
    """A deterministic partition of the vocabulary into prompt batches."""

    dataset_id: str
    template_kind: str
    batch_size: int
    seed: int
    batches: tuple[tuple[str, ...], ...]

    @property
    def prompts_per_image(self) -> int:
        return len(self.batches)

    def to_json(self, path: str | Path) -> None:
        obj = {
            "dataset_id": self.dataset_id,
            "template_kind": self.template_kind,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "batches": [list(b) for b in self.batches],
        }
        Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "PromptPlan":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            dataset_id=obj["dataset_id"],
            template_kind=obj["template_kind"],
            batch_size=int(obj["batch_size"]),
            seed=int(obj["seed"]),
            batches=tuple(tuple(b) for b in obj["batches"]),
        )


@dataclass(frozen=True)
class PromptEvalResult:
    """Recall / verbosity / latency summary for one prompting configuration."""

    recall: float
    mean_output_length: float
    wall_time_seconds: float


def plan_batches(vocab: LabelVocabulary, batch_size: int, seed: int) -> PromptPlan:
    """Shuffle the vocabulary and chunk it into batches of batch_size.

    Batches partition the vocabulary exactly: disjoint, covering, all of
    size batch_size except possibly the last. This is the batched-selection
    plan; :func:`build_plan` derives the other strategies from the same
    partitioning.
    """
    if not 1 <= batch_size <= len(vocab):
        raise ValueError(
            f"batch_size {batch_size} out of range [1, {len(vocab)}]"
        )
    shuffled = _shuffled(vocab.labels, seed)
    batches = tuple(
        tuple(shuffled[i : i + batch_size]) for i in range(0, len(shuffled), batch_size)
    )
    return PromptPlan(
        dataset_id=vocab.dataset_id,
        template_kind=KIND_BATCHED,
        batch_size=batch_size,
        seed=seed,
        batches=batches,
    )


def build_plan(
    vocab: LabelVocabulary,
    kind: str,
    batch_size: Optional[int] = None,
    seed: int = 0,
) -> PromptPlan:
    """Build a plan for any strategy.

    Binary questioning uses singleton batches (one yes/no prompt per
    label); direct selection uses one batch holding the whole shuffled
    vocabulary; batched selection chunks by batch_size.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown template kind {kind!r}")
    if kind == KIND_BINARY:
        effective = 1
    elif kind == KIND_DIRECT:
        effective = len(vocab)
    else:
        if batch_size is None:
            raise ValueError("batched plans need an explicit batch_size")
        effective = batch_size
    plan = plan_batches(vocab, effective, seed)
    return PromptPlan(
        dataset_id=plan.dataset_id,
        template_kind=kind,
        batch_size=effective,
        seed=seed,
        batches=plan.batches,
    )


def template_text(kind: str) -> str:
    """Verbatim prompt template for a strategy."""
    if kind not in KINDS:
        raise ValueError(f"unknown template kind {kind!r}")
    return (
        resources.files("relabel.templates").joinpath(f"{kind}.txt").read_text("utf-8").rstrip("\n")
    )


def render_prompt(plan: PromptPlan, batch_index: int, image_ref: str) -> str:
    """Substitute one batch into the plan's template.

    The candidate list is comma-joined in plan order. The image reference
    is carried in an attachment marker ahead of the instruction preamble;
    adapters replace or strip it depending on how their endpoint accepts
    images.
    """
    if not 0 <= batch_index < len(plan.batches):
        raise IndexError(
            f"batch index {batch_index} out of range [0, {len(plan.batches)})"
        )
    batch = plan.batches[batch_index]
    body = template_text(plan.template_kind)
    if plan.template_kind == KIND_BINARY:
        body = body.replace(_LABEL_NAME_SLOT, batch[0])
    else:
        body = body.replace(_CANDIDATES_SLOT, ", ".join(batch))
    return f"<image:{image_ref}> {_PREAMBLE}\n{body}"


def evaluate_responses(
    predictions: Mapping[str, Set[str]],
    references: Mapping[str, Set[str]],
    wall_time_seconds: float = 0.0,
) -> PromptEvalResult:
    """Micro-averaged set recall and mean output length over an eval slice.

    Recall is the recovered fraction of reference labels, summed over
    images with non-empty references. Mean output length averages the
    prediction set size over every image in the slice.
    """
    if not references:
        raise ValueError("empty evaluation slice")
    ref_total = 0
    hit_total = 0
    length_total = 0
    for image_id, ref in references.items():
        pred = set(predictions.get(image_id, frozenset()))
        length_total += len(pred)
        if ref:
            ref_total += len(ref)
            hit_total += len(pred & set(ref))
    if ref_total == 0:
        raise ValueError("all reference label sets are empty; recall undefined")
    return PromptEvalResult(
        recall=hit_total / ref_total,
        mean_output_length=length_total / len(references),
        wall_time_seconds=wall_time_seconds,
    )
