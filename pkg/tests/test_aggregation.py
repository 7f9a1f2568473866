import math
import random

import pytest

from conftest import build_matrix
from relabel.aggregation import (
    THRESHOLD_ABSOLUTE,
    THRESHOLD_FRACTION,
    AggregationConfig,
    SupportScores,
    diagnose,
    filter_labels,
    renovate,
    softmax_normalize,
    weighted_support,
)
from relabel.errors import UnknownMethodError
from relabel.expertise import ExpertiseEstimate
from relabel.labelspace import LabelVocabulary

from instancegen import random_instance


def _weights(**kwargs):
    return [ExpertiseEstimate.from_accuracy(m, v) for m, v in kwargs.items()]


class TestWeightedSupport:
    def test_indicator_sum(self, vocab4):
        matrix = build_matrix(
            vocab4,
            {"img1": {"a": ["cat"], "b": ["dog"], "c": ["cat"]}},
        )
        support = weighted_support(matrix, _weights(a=0.8, b=0.6, c=0.5))
        assert support.score("img1", "cat") == pytest.approx(1.3, abs=1e-12)
        assert support.score("img1", "dog") == pytest.approx(0.6, abs=1e-12)

    def test_unpredicted_label_scores_zero(self, vocab4):
        matrix = build_matrix(vocab4, {"img1": {"a": ["cat"], "b": [], "c": []}})
        support = weighted_support(matrix, _weights(a=0.8, b=0.6, c=0.5))
        assert support.score("img1", "frog") == 0.0
        assert "frog" not in support.scores["img1"]

    def test_matrix_method_without_weight_raises(self, vocab4):
        matrix = build_matrix(vocab4, {"img1": {"a": ["cat"], "b": ["dog"]}})
        with pytest.raises(UnknownMethodError):
            weighted_support(matrix, _weights(a=0.8))

    def test_matches_brute_force_double_loop(self):
        rng = random.Random(20)
        labels = [f"l{i}" for i in range(8)]
        vocab = LabelVocabulary.create("d", labels)
        cells = {
            f"img{j}": {
                f"m{i}": [l for l in labels if rng.random() < 0.4] for i in range(6)
            }
            for j in range(10)
        }
        matrix = build_matrix(vocab, cells)
        weights = {f"m{i}": rng.random() for i in range(6)}
        support = weighted_support(
            matrix, [ExpertiseEstimate.from_accuracy(m, v) for m, v in weights.items()]
        )
        for image_id in matrix.images:
            for label in labels:
                expected = sum(
                    weights[m]
                    for m in matrix.methods
                    if label in matrix.labels_for(image_id, m)
                )
                assert support.score(image_id, label) == pytest.approx(expected, abs=1e-9)


class TestFilterLabels:
    def _support(self, vocab, per_image):
        return SupportScores(vocab=vocab, scores=per_image)

    def test_absolute_threshold(self, vocab4):
        support = self._support(vocab4, {"img1": {"cat": 5.2, "dog": 0.7, "bird": 0.3}})
        cfg = AggregationConfig(threshold=0.9, top_k=3, threshold_mode=THRESHOLD_ABSOLUTE)
        assert filter_labels(support, cfg, full=6.0) == {"img1": ["cat"]}

    def test_top_k_binds(self, vocab4):
        support = self._support(
            vocab4, {"img1": {"cat": 2.0, "dog": 1.5, "bird": 1.2, "frog": 1.0}}
        )
        cfg = AggregationConfig(threshold=0.5, top_k=3, threshold_mode=THRESHOLD_ABSOLUTE)
        assert filter_labels(support, cfg, full=6.0) == {"img1": ["cat", "dog", "bird"]}

    def test_fraction_cutoff(self, vocab4):
        # 0.900 of full score 5.794 puts the bar at 5.2146
        support = self._support(vocab4, {"img1": {"cat": 5.30, "dog": 5.10}})
        cfg = AggregationConfig(threshold=0.900, top_k=3, threshold_mode=THRESHOLD_FRACTION)
        assert filter_labels(support, cfg, full=5.794) == {"img1": ["cat"]}
        assert cfg.cutoff(5.794) == pytest.approx(5.2146, abs=1e-9)

    def test_empty_survivor_set_is_legal(self, vocab4):
        support = self._support(vocab4, {"img1": {"cat": 0.2}})
        cfg = AggregationConfig(threshold=1.0, top_k=3, threshold_mode=THRESHOLD_ABSOLUTE)
        assert filter_labels(support, cfg, full=6.0) == {"img1": []}

    def test_ties_break_by_vocabulary_order(self, vocab4):
        support = self._support(vocab4, {"img1": {"dog": 1.0, "bird": 1.0, "cat": 1.0}})
        cfg = AggregationConfig(threshold=0.0, top_k=2, threshold_mode=THRESHOLD_ABSOLUTE)
        assert filter_labels(support, cfg, full=6.0) == {"img1": ["cat", "dog"]}

    def test_fraction_mode_needs_positive_full(self, vocab4):
        support = self._support(vocab4, {"img1": {"cat": 1.0}})
        cfg = AggregationConfig(threshold=0.5, top_k=3)
        with pytest.raises(ValueError):
            filter_labels(support, cfg, full=0.0)


class TestSoftmaxNormalize:
    def test_symmetry(self):
        assert softmax_normalize({"a": 1.0, "b": 1.0}) == {"a": 0.5, "b": 0.5}

    def test_two_to_one(self):
        out = softmax_normalize({"a": 2.0, "b": 1.0})
        assert out["a"] == pytest.approx(0.7311, abs=1e-4)
        assert out["b"] == pytest.approx(0.2689, abs=1e-4)

    def test_singleton(self):
        assert softmax_normalize({"a": 3.7}) == {"a": 1.0}

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            softmax_normalize({})

    def test_matches_unstabilized_formula(self):
        rng = random.Random(8)
        for _ in range(40):
            scores = {f"l{i}": rng.uniform(0, 6) for i in range(rng.randint(1, 7))}
            out = softmax_normalize(scores)
            denom = sum(math.exp(s) for s in scores.values())
            for label, s in scores.items():
                assert out[label] == pytest.approx(math.exp(s) / denom, abs=1e-9)
            assert sum(out.values()) == pytest.approx(1.0, abs=1e-9)

    def test_monotone_in_score(self):
        out = softmax_normalize({"a": 0.4, "b": 2.2, "c": 1.1})
        assert out["b"] > out["c"] > out["a"]


class TestDiagnose:
    def test_clean(self):
        assert diagnose("cat", ["cat"]) == "clean"

    def test_noisy(self):
        assert diagnose("cat", ["dog"]) == "noisy_label"

    def test_missing_keeps_original_plus_extras(self):
        assert diagnose("forest", ["forest", "man", "boy"]) == "missing_label"

    def test_uncertainty_in_small_spaces_reads_as_missing(self):
        # a digit split 0.54/0.46 between two classes keeps its original
        assert diagnose("nine", ["nine", "four"]) == "missing_label"

    def test_noisy_and_missing(self):
        assert diagnose("cat", ["dog", "bird"]) == "noisy_and_missing"

    def test_unresolved(self):
        assert diagnose("cat", []) == "unresolved"


class TestRenovate:
    def test_degenerate_single_method(self, vocab4):
        matrix = build_matrix(
            vocab4,
            {
                "img1": {"solo": ["cat", "dog"], "origin": ["cat"]},
                "img2": {"solo": ["bird"], "origin": ["frog"]},
            },
        )
        cfg = AggregationConfig(
            threshold=0.0,
            top_k=len(vocab4),
            threshold_mode=THRESHOLD_ABSOLUTE,
            methods=("solo",),
        )
        soft, report = renovate(matrix, _weights(solo=1.0, origin=0.9), cfg)
        by_id = {s.image_id: s for s in soft}
        assert by_id["img1"].labels() == ("cat", "dog")
        likes = [e.likelihood for e in by_id["img1"].entries]
        assert likes == pytest.approx([0.5, 0.5], abs=1e-12)
        assert by_id["img2"].labels() == ("bird",)
        assert by_id["img2"].diagnosis == "noisy_label"

    def test_report_counts_partition_images(self):
        rng = random.Random(31)
        for _ in range(20):
            matrix, weights, cfg = random_instance(rng)
            soft, report = renovate(matrix, weights, cfg)
            counts = report.diagnosis_counts
            assert sum(counts.values()) == report.image_count == len(matrix.images)
            assert report.noisy_label_count == counts["noisy_label"] + counts["noisy_and_missing"]
            assert report.missing_label_count == counts["missing_label"] + counts["noisy_and_missing"]

    def test_entries_sorted_and_normalized(self):
        rng = random.Random(77)
        for _ in range(20):
            matrix, weights, cfg = random_instance(rng)
            soft, _ = renovate(matrix, weights, cfg)
            for s in soft:
                scores = [e.score for e in s.entries]
                assert scores == sorted(scores, reverse=True)
                if s.entries:
                    assert sum(e.likelihood for e in s.entries) == pytest.approx(1.0, abs=1e-9)
                    assert len(s.entries) <= cfg.top_k

    def test_missing_origin_cell_raises(self, vocab4):
        matrix = build_matrix(
            vocab4, {"img1": {"a": ["cat"], "origin": ["cat"]}, "img2": {"a": ["dog"]}}
        )
        cfg = AggregationConfig(threshold=0.0, top_k=2, threshold_mode=THRESHOLD_ABSOLUTE)
        with pytest.raises(ValueError):
            renovate(matrix, _weights(a=1.0, origin=1.0), cfg)


class TestFilterProperties:
    def test_anti_monotone_in_threshold_and_k(self):
        rng = random.Random(5)
        for _ in range(40):
            matrix, weights, cfg = random_instance(rng)
            soft, _ = renovate(matrix, weights, cfg)
            base = {s.image_id: set(s.labels()) for s in soft}

            raised = cfg.threshold * 1.5 + 0.05
            if cfg.threshold_mode == THRESHOLD_FRACTION:
                raised = min(raised, 1.0)
            tighter_tau = AggregationConfig(
                threshold=raised,
                top_k=cfg.top_k,
                threshold_mode=cfg.threshold_mode,
                methods=cfg.methods,
            )
            soft2, _ = renovate(matrix, weights, tighter_tau)
            for s in soft2:
                assert set(s.labels()) <= base[s.image_id]

            if cfg.top_k > 1:
                lower_k = AggregationConfig(
                    threshold=cfg.threshold,
                    top_k=cfg.top_k - 1,
                    threshold_mode=cfg.threshold_mode,
                    methods=cfg.methods,
                )
                soft3, _ = renovate(matrix, weights, lower_k)
                for s in soft3:
                    assert set(s.labels()) <= base[s.image_id]

    def test_weight_scaling_invariance_in_fraction_mode(self):
        # powers of two scale floats exactly, so sets must be identical
        rng = random.Random(13)
        for _ in range(25):
            matrix, weights, cfg = random_instance(rng)
            if cfg.threshold_mode != THRESHOLD_FRACTION:
                continue
            soft, _ = renovate(matrix, weights, cfg)
            for gamma in (0.5, 2.0, 4.0):
                scaled = [
                    ExpertiseEstimate.from_accuracy(w.method_id, w.est_acc * gamma)
                    for w in weights
                ]
                soft_scaled, _ = renovate(matrix, scaled, cfg)
                for a, b in zip(soft, soft_scaled):
                    assert a.labels() == b.labels()
                    assert a.diagnosis == b.diagnosis
