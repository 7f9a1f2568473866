"""Benchmark the compiled kernel lane against the pure-Python fallback.

Generates one synthetic CSR instance shaped like a real renovation run and
times support accumulation plus filtering on every available lane. The two
lanes are also cross-checked for bit-identical output while we are at it,
since a fast wrong kernel would be worse than no kernel.
"""

from __future__ import annotations

import random
import time

import numpy as np

from . import kernels

__all__ = ["make_instance", "run_benchmark", "format_benchmark"]


def make_instance(
    n_images: int,
    n_labels: int,
    n_methods: int,
    mean_set_size: float,
    seed: int = 0,
):
    """Random CSR cells plus weights, shaped (images x methods)."""
    rng = random.Random(seed)
    weights = np.asarray([rng.uniform(0.1, 1.0) for _ in range(n_methods)], dtype=np.float64)
    starts = np.zeros(n_images * n_methods + 1, dtype=np.int64)
    flat: list[int] = []
    pos = 0
    for _ in range(n_images):
        for _ in range(n_methods):
            size = min(n_labels, int(rng.expovariate(1.0 / mean_set_size)) if mean_set_size > 0 else 0)
            flat.extend(sorted(rng.sample(range(n_labels), size)))
            pos += 1
            starts[pos] = len(flat)
    return weights, starts, np.asarray(flat, dtype=np.int32)


def run_benchmark(
    n_images: int = 20000,
    n_labels: int = 100,
    n_methods: int = 7,
    mean_set_size: float = 3.0,
    cutoff: float = 1.0,
    top_k: int = 3,
    repeats: int = 3,
    seed: int = 0,
) -> dict:
    """Time each lane; returns per-lane seconds and the speedup ratio."""
    weights, starts, flat = make_instance(n_images, n_labels, n_methods, mean_set_size, seed)
    results: dict = {
        "instance": {
            "images": n_images,
            "labels": n_labels,
            "methods": n_methods,
            "mean_set_size": mean_set_size,
            "nonzeros": int(len(flat)),
        },
        "lanes": {},
    }
    outputs = {}
    for lane in kernels.available_backends():
        impl = kernels.get_backend(lane)
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            sup = impl.support_scores(weights, starts, flat, n_images, n_labels)
            kept = impl.filter_topk_softmax(*sup, cutoff, top_k)
            best = min(best, time.perf_counter() - t0)
        outputs[lane] = (sup, kept)
        results["lanes"][lane] = {"seconds": best}
    if len(outputs) == 2:
        same = all(
            np.array_equal(a, b)
            for a, b in zip(outputs["compiled"][0] + outputs["compiled"][1],
                            outputs["python"][0] + outputs["python"][1])
        )
        results["lanes_identical"] = bool(same)
        results["speedup"] = (
            results["lanes"]["python"]["seconds"] / results["lanes"]["compiled"]["seconds"]
        )
    return results


def format_benchmark(results: dict) -> str:
    inst = results["instance"]
    lines = [
        f"instance: {inst['images']} images x {inst['labels']} labels x "
        f"{inst['methods']} methods ({inst['nonzeros']} predictions)",
    ]
    for lane, stats in results["lanes"].items():
        lines.append(f"  {lane:>8}: {stats['seconds'] * 1000:10.2f} ms")
    if "speedup" in results:
        lines.append(f"  speedup: {results['speedup']:.1f}x (outputs identical: {results['lanes_identical']})")
    return "\n".join(lines)
