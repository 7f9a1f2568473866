"""Kernel lane selection: compiled extension when built, pure Python otherwise.

The two lanes implement the same contract and produce bit-identical arrays.
Set ``RELABEL_PURE_PYTHON=1`` to force the fallback even when the compiled
module is available (used by the benchmark and the lane-equivalence tests).
"""

from __future__ import annotations

import os

from . import _support_py

__all__ = ["backend", "available_backends", "get_backend", "support_scores", "filter_topk_softmax"]

_FORCE_PURE = os.environ.get("RELABEL_PURE_PYTHON", "").lower() in ("1", "true", "yes")

try:
    from . import _support as _compiled
except ImportError:
    _compiled = None

_active = _compiled if (_compiled is not None and not _FORCE_PURE) else _support_py

support_scores = _active.support_scores
filter_topk_softmax = _active.filter_topk_softmax


def backend() -> str:
    """Name of the active lane: 'compiled' or 'python'."""
    return _active.BACKEND


def available_backends() -> tuple[str, ...]:
    """All importable lanes, compiled first when present."""
    return ("compiled", "python") if _compiled is not None else ("python",)


def get_backend(name: str):
    """Fetch a lane module by name (for benchmarks and equivalence tests)."""
    if name == "python":
        return _support_py
    if name == "compiled":
        if _compiled is None:
            raise ValueError("compiled kernel is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
