"""Label vocabularies and sanitization of raw model responses.

Vision-language models asked to pick labels from a fixed candidate list
misbehave in predictable ways: they answer with broader terms that are not
candidates, repeat the same label many times, pad their answers instead of
replying "None", and occasionally free-associate. Everything downstream
assumes clean, in-vocabulary label sets, so this module is the single
choke point where raw strings become canonical labels and every drop is
accounted for.

Canonical form is lowercase, whitespace-trimmed, internally single-spaced.
Out-of-vocabulary strings are never fuzzily matched; they are dropped and
recorded unless an explicit synonym mapping exists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import VocabularyError

__all__ = [
    "LabelVocabulary",
    "SanitizationReport",
    "canonical_form",
    "canonicalize",
    "sanitize_response",
]

NULL_RESPONSE = "none"


def canonical_form(raw: str) -> str:
    """Lowercase, trim, and collapse internal whitespace."""
    return " ".join(raw.split()).lower()


@dataclass(frozen=True)
class LabelVocabulary:
    """The ordered candidate label set for one dataset.

    Order is significant: a label's position defines its index identity,
    used for deterministic tie-breaking everywhere downstream. ``synonyms``
    maps canonical raw forms to canonical member labels and is the only
    sanctioned way to accept a non-member string.
    """

    dataset_id: str
    labels: tuple[str, ...]
    synonyms: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.labels:
            raise VocabularyError(f"vocabulary {self.dataset_id!r} is empty")
        seen: set[str] = set()
        for lbl in self.labels:
            if lbl != canonical_form(lbl):
                raise VocabularyError(f"label {lbl!r} is not in canonical form")
            if lbl in seen:
                raise VocabularyError(f"duplicate label {lbl!r} after canonicalization")
            seen.add(lbl)
        for key, value in self.synonyms.items():
            if value not in seen:
                raise VocabularyError(
                    f"synonym target {value!r} (for {key!r}) is not a vocabulary label"
                )

    @classmethod
    def create(
        cls,
        dataset_id: str,
        labels: Sequence[str],
        synonyms: Optional[Mapping[str, str]] = None,
    ) -> "LabelVocabulary":
        """Build a vocabulary, canonicalizing raw labels and synonym pairs."""
        canon = tuple(canonical_form(lbl) for lbl in labels)
        syn = {
            canonical_form(k): canonical_form(v) for k, v in (synonyms or {}).items()
        }
        return cls(dataset_id=dataset_id, labels=canon, synonyms=syn)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {lbl: i for i, lbl in enumerate(self.labels)}

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self.labels)

    def index_of(self, label: str) -> int:
        """Position of a canonical label; raises KeyError for non-members."""
        return self._index[label]

    def sort_labels(self, labels: Iterable[str]) -> list[str]:
        """Sort canonical labels into vocabulary order."""
        return sorted(labels, key=self._index.__getitem__)

    @classmethod
    def from_json(cls, path: str | Path) -> "LabelVocabulary":
        """Load a vocabulary file: {dataset_id, labels, synonyms?}."""
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        try:
            dataset_id = obj["dataset_id"]
            labels = obj["labels"]
        except (TypeError, KeyError) as exc:
            raise VocabularyError(f"{path}: missing field {exc}") from exc
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            raise VocabularyError(f"{path}: labels must be an array of strings")
        return cls.create(dataset_id, labels, obj.get("synonyms"))

    def to_json(self, path: str | Path) -> None:
        obj: dict = {"dataset_id": self.dataset_id, "labels": list(self.labels)}
        if self.synonyms:
            obj["synonyms"] = dict(sorted(self.synonyms.items()))
        Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SanitizationReport:
    """Outcome of cleaning one raw multi-label response.

    ``accepted`` holds canonical vocabulary members, deduplicated in first
    occurrence order and truncated to the cap. ``was_null`` marks the
    explicit "None" reply, which is an abstention rather than an error.
    """

    accepted: tuple[str, ...]
    rejected_out_of_vocab: tuple[str, ...] = ()
    duplicates_removed: int = 0
    truncated: bool = False
    was_null: bool = False


def canonicalize(raw: str, vocab: LabelVocabulary) -> Optional[str]:
    """Map a raw string onto a vocabulary label, or None when it misses.

    Matching is by canonical form (case folding, whitespace trimming and
    collapse) against the vocabulary, then against the synonym map. Absence
    is a value: broader or hallucinated terms simply return None.
    """
    form = canonical_form(raw)
    if form in vocab:
        return form
    return vocab.synonyms.get(form)


def sanitize_response(
    raw_labels: Sequence[str],
    vocab: LabelVocabulary,
    cap: int,
) -> SanitizationReport:
    """Clean a raw label list: canonicalize, drop, dedupe, truncate.

    A sole "None" entry (case-insensitive) yields an empty accepted list
    with ``was_null`` set, except when "none" itself is a vocabulary label.
    The cap bounds runaway repetitive answers; truncation past it is
    flagged rather than silently applied.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    if (
        len(raw_labels) == 1
        and canonical_form(raw_labels[0]) == NULL_RESPONSE
        and NULL_RESPONSE not in vocab
    ):
        return SanitizationReport(accepted=(), was_null=True)

    accepted: list[str] = []
    seen: set[str] = set()
    rejected: list[str] = []
    duplicates = 0
    for raw in raw_labels:
        label = canonicalize(raw, vocab)
        if label is None:
            rejected.append(raw)
        elif label in seen:
            duplicates += 1
        else:
            seen.add(label)
            accepted.append(label)
    truncated = len(accepted) > cap
    if truncated:
        accepted = accepted[:cap]
    return SanitizationReport(
        accepted=tuple(accepted),
        rejected_out_of_vocab=tuple(rejected),
        duplicates_removed=duplicates,
        truncated=truncated,
    )
