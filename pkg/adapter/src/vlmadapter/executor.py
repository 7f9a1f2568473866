"""Plan execution: prompts out, predictions JSONL in ingestion format back.

One request per image and batch, bounded-parallel under the profile's rate
limit. Answers are unioned across batches per image (first-seen order);
raw responses are preserved batch by batch. Request failures retry per the
profile and then degrade to an empty answer with an error note in the raw
text; a single bad request never aborts the run. Records are written
sorted by (image_id, method), so output is deterministic for a fixed plan
and mock.
"""

from __future__ import annotations

import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .endpoints import EndpointProfile, open_endpoint
from .extract import extract_answer

__all__ = ["Plan", "load_plan", "render_prompt", "execute_plan", "write_records"]

_SLOTS = {"binary": "<label name>", "direct": "<label candidate list>", "batched": "<label candidate list>"}
_PREAMBLE = "Please follow the instructions with no exceptions."


@dataclass(frozen=True)
class Plan:
    dataset_id: str
    template_kind: str
    batch_size: int
    seed: int
    batches: tuple[tuple[str, ...], ...]


def load_plan(path: str | Path) -> Plan:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    kind = obj["template_kind"]
    if kind not in _SLOTS:
        raise ValueError(f"unknown template kind {kind!r}")
    return Plan(
        dataset_id=obj["dataset_id"],
        template_kind=kind,
        batch_size=int(obj["batch_size"]),
        seed=int(obj["seed"]),
        batches=tuple(tuple(b) for b in obj["batches"]),
    )


def render_prompt(plan: Plan, batch_index: int, image_ref: str) -> str:
    """Substitute one batch into the bundled template for the plan's kind."""
    batch = plan.batches[batch_index]
    template = (
        resources.files("vlmadapter.templates")
        .joinpath(f"{plan.template_kind}.txt")
        .read_text("utf-8")
        .rstrip("\n")
    )
    slot = _SLOTS[plan.template_kind]
    filler = batch[0] if plan.template_kind == "binary" else ", ".join(batch)
    return f"<image:{image_ref}> {_PREAMBLE}\n{template.replace(slot, filler)}"


@dataclass(frozen=True)
class ImageResult:
    image_id: str
    labels: tuple[str, ...]
    raw: str
    errors: tuple[str, ...]


def _send_with_retries(endpoint, prompt, image_id, batch_index, profile: EndpointProfile):
    last_error = None
    for attempt in range(profile.max_retries + 1):
        try:
            return endpoint.send(prompt, image_id, batch_index), None
        except Exception as exc:  # endpoint failures must never abort the run
            last_error = f"{type(exc).__name__}: {exc}"
            if attempt < profile.max_retries:
                time.sleep(profile.retry_backoff_seconds * (attempt + 1))
    return None, last_error


def _run_image(plan: Plan, image_id: str, endpoint, profile: EndpointProfile) -> ImageResult:
    labels: list[str] = []
    seen: set[str] = set()
    raw_parts: list[str] = []
    errors: list[str] = []
    for batch_index in range(len(plan.batches)):
        prompt = render_prompt(plan, batch_index, image_id)
        response, error = _send_with_retries(endpoint, prompt, image_id, batch_index, profile)
        if error is not None:
            errors.append(f"batch {batch_index}: {error}")
            raw_parts.append(f"[batch {batch_index}] ERROR {error}")
            continue
        raw_parts.append(f"[batch {batch_index}] {response}")
        for answer in extract_answer(response):
            if answer not in seen:
                seen.add(answer)
                labels.append(answer)
    return ImageResult(
        image_id=image_id,
        labels=tuple(labels),
        raw="\n".join(raw_parts),
        errors=tuple(errors),
    )


def execute_plan(
    plan: Plan,
    image_ids: Sequence[str],
    profile: EndpointProfile,
    method_id: str,
    log=sys.stderr,
) -> list[dict]:
    """Run every (image, batch) request; returns ingestion-format records."""
    endpoint = open_endpoint(profile)
    with ThreadPoolExecutor(max_workers=profile.parallelism) as pool:
        results = list(
            pool.map(lambda img: _run_image(plan, img, endpoint, profile), image_ids)
        )
    records = []
    for result in sorted(results, key=lambda r: r.image_id):
        if result.errors and log is not None:
            print(
                f"warning: {result.image_id}: {'; '.join(result.errors)}", file=log
            )
        records.append(
            {
                "image_id": result.image_id,
                "method": method_id,
                "labels": list(result.labels),
                "raw": result.raw,
            }
        )
    return records


def write_records(records: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
