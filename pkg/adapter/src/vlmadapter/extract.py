"""Lenient extraction of the answer list from model responses.

Models are asked for a JSON dict with an "answer" key but drift from the
format constantly: single quotes, code fences, prose before and after the
object, a bare "None". The scan below finds the first brace-balanced span
that parses (json first, then a python-literal fallback for single-quoted
dicts) and contains an "answer" key. Anything unparseable yields an empty
answer; the raw text is always preserved upstream.
"""

from __future__ import annotations

import ast
import json
import re
from typing import Optional

__all__ = ["extract_answer"]

_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def _candidate_spans(text: str):
    """Brace-balanced {...} spans, outermost first, left to right."""
    depth = 0
    start = None
    for i, ch in enumerate(text):
        if ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}" and depth > 0:
            depth -= 1
            if depth == 0 and start is not None:
                yield text[start : i + 1]
                start = None


def _parse_object(span: str) -> Optional[dict]:
    for parser in (json.loads, ast.literal_eval):
        try:
            obj = parser(span)
        except (ValueError, SyntaxError):
            continue
        if isinstance(obj, dict):
            return obj
    return None


def _normalize(answer) -> list[str]:
    if answer is None:
        return []
    if isinstance(answer, str):
        if answer.strip().lower() in ("", "none"):
            return []
        return [part.strip() for part in answer.split(",") if part.strip()]
    if isinstance(answer, (list, tuple)):
        out = []
        for item in answer:
            if isinstance(item, str) and item.strip() and item.strip().lower() != "none":
                out.append(item.strip())
        return out
    return []


def extract_answer(text: str) -> list[str]:
    """Answer strings from one raw response; empty when nothing parses."""
    if not text:
        return []
    stripped = text.strip()
    if stripped.lower() == "none":
        return []
    fenced = _FENCE.search(text)
    sources = [fenced.group(1)] if fenced else []
    sources.append(text)
    for source in sources:
        for span in _candidate_spans(source):
            obj = _parse_object(span)
            if obj is not None and "answer" in obj:
                return _normalize(obj["answer"])
    return []
