"""Pure-Python aggregation kernels (fallback lane).

Same contract as the compiled lane in ``_support.pyx``; both must produce
bit-identical arrays. The contract that makes that possible:

* support accumulation runs method-major, so each label's partial sums are
  added in the same order in both lanes;
* support entries are emitted in ascending label-index order;
* filtering ranks by (score descending, label index ascending) and softmax
  subtracts the maximum before exponentiating, summing in rank order.

Inputs are CSR-style flat arrays. ``cell_starts`` has one slot per
(image, method) cell, image-major then method-minor, plus a final
terminator; ``cell_labels`` holds the label indices of every cell
back to back.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["support_scores", "filter_topk_softmax"]

BACKEND = "python"


def support_scores(weights, cell_starts, cell_labels, n_images, n_labels):
    """Weighted support per (image, label), sparse over predicted labels.

    Returns (sup_ptr, sup_labels, sup_scores): for image j the entries
    live in sup_labels[sup_ptr[j]:sup_ptr[j+1]], label indices ascending.
    """
    n_methods = len(weights)
    sup_ptr = np.zeros(n_images + 1, dtype=np.int64)
    out_labels: list[int] = []
    out_scores: list[float] = []
    for j in range(n_images):
        acc: dict[int, float] = {}
        base = j * n_methods
        for i in range(n_methods):
            w = float(weights[i])
            start = int(cell_starts[base + i])
            stop = int(cell_starts[base + i + 1])
            for p in range(start, stop):
                lbl = int(cell_labels[p])
                acc[lbl] = acc.get(lbl, 0.0) + w
        for lbl in sorted(acc):
            out_labels.append(lbl)
            out_scores.append(acc[lbl])
        sup_ptr[j + 1] = len(out_labels)
    return (
        sup_ptr,
        np.asarray(out_labels, dtype=np.int32),
        np.asarray(out_scores, dtype=np.float64),
    )


def filter_topk_softmax(sup_ptr, sup_labels, sup_scores, cutoff, top_k):
    """Threshold, rank, truncate, and softmax-normalize per image.

    Keeps entries with score >= cutoff, ranked by score descending with
    ties by label index, truncated to top_k. Likelihoods are softmax over
    the kept scores, stabilized by subtracting the maximum. Images keeping
    nothing contribute zero entries.
    """
    n_images = len(sup_ptr) - 1
    kept_ptr = np.zeros(n_images + 1, dtype=np.int64)
    out_labels: list[int] = []
    out_scores: list[float] = []
    out_like: list[float] = []
    for j in range(n_images):
        start = int(sup_ptr[j])
        stop = int(sup_ptr[j + 1])
        candidates = [
            (int(sup_labels[p]), float(sup_scores[p]))
            for p in range(start, stop)
            if float(sup_scores[p]) >= cutoff
        ]
        # stable sort by descending score keeps the ascending-label input
        # order as the tie-break
        candidates.sort(key=lambda t: -t[1])
        kept = candidates[:top_k]
        if kept:
            peak = kept[0][1]
            exps = [math.exp(s - peak) for _, s in kept]
            denom = 0.0
            for e in exps:
                denom += e
            for (lbl, s), e in zip(kept, exps):
                out_labels.append(lbl)
                out_scores.append(s)
                out_like.append(e / denom)
        kept_ptr[j + 1] = len(out_labels)
    return (
        kept_ptr,
        np.asarray(out_labels, dtype=np.int32),
        np.asarray(out_scores, dtype=np.float64),
        np.asarray(out_like, dtype=np.float64),
    )
