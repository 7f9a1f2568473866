import itertools
import random

import pytest

from relabel import oracle
from relabel.errors import DegenerateGroundTruthError
from relabel.expertise import ExpertiseEstimate, estimate_accuracy, full_score

# published per-dataset accuracy rows: every row but one sums to its printed
# full score; the 100-class row prints 4.730 yet sums to 5.352, so the sum is
# asserted and the printed value is NOT encoded anywhere
TABLE_ROWS = {
    "cifar10": ([0.777, 0.815, 0.676, 0.650, 0.973, 0.928, 0.975], 5.794),
    "caltech256": ([0.927, 0.843, 0.784, 0.879, 0.808, 0.935], 5.176),
    "imagenet1k": ([0.858, 0.807, 0.490, 0.793, 0.490, 0.569], 4.007),
    "quickdraw": ([0.710, 0.773, 0.430, 0.792, 0.181, 0.210], 3.096),
    "mnist": ([0.592, 0.696, 0.582, 0.822, 0.983, 0.988, 0.991], 5.654),
}
CIFAR100_ROW = [0.750, 0.812, 0.650, 0.774, 0.839, 0.671, 0.856]


class TestEstimateAccuracy:
    def test_exact_predictions_leave_only_the_penalty(self):
        gt = {"i1": {"a"}, "i2": {"b"}}
        est = estimate_accuracy("m", {"i1": {"a"}, "i2": {"b"}}, gt, n=2, label_space_size=4)
        assert est.coverage_term == 1.0
        assert est.penalty_term == 0.75
        assert est.est_acc == 0.75

    def test_predict_everything_scores_zero(self):
        labels = {"a", "b", "c", "d"}
        gt = {"i1": {"a"}, "i2": {"b"}}
        est = estimate_accuracy("m", {"i1": labels, "i2": labels}, gt, n=2, label_space_size=4)
        assert est.coverage_term == 1.0
        assert est.penalty_term == 0.0
        assert est.est_acc == 0.0

    def test_partial_coverage(self):
        gt = {"i1": {"a", "b"}, "i2": {"c", "d"}}
        est = estimate_accuracy("m", {"i1": {"a"}, "i2": {"c"}}, gt, n=2, label_space_size=4)
        assert est.coverage_term == 0.5
        assert est.penalty_term == 0.75
        assert est.est_acc == 0.375

    def test_absent_images_count_as_empty(self):
        gt = {"i1": {"a"}, "i2": {"b"}}
        est = estimate_accuracy("m", {"i1": {"a"}}, gt, n=2, label_space_size=4)
        assert est.coverage_term == 0.5
        # only one prediction emitted over two images
        assert est.penalty_term == 1 - 1 / 8

    def test_degenerate_ground_truth_raises(self):
        with pytest.raises(DegenerateGroundTruthError):
            estimate_accuracy("m", {}, {"i1": set(), "i2": set()}, n=2, label_space_size=4)

    def test_matches_plain_formula_on_random_instances(self):
        rng = random.Random(11)
        labels = [f"l{i}" for i in range(6)]
        for _ in range(50):
            images = [f"i{j}" for j in range(rng.randint(1, 8))]
            gt = {img: {l for l in labels if rng.random() < 0.5} for img in images}
            if sum(len(s) for s in gt.values()) == 0:
                continue
            preds = {img: {l for l in labels if rng.random() < 0.4} for img in images}
            est = estimate_accuracy("m", preds, gt, n=len(images), label_space_size=6)
            expected = oracle.estimate_accuracy(preds, gt, len(images), 6)
            assert est.est_acc == pytest.approx(expected, abs=1e-12)

    def test_more_predictions_strictly_lower_penalty(self):
        gt = {"i1": {"a"}, "i2": {"b"}}
        smaller = estimate_accuracy("m", {"i1": {"a"}}, gt, n=2, label_space_size=4)
        bigger = estimate_accuracy("m", {"i1": {"a"}, "i2": {"b", "c"}}, gt, n=2, label_space_size=4)
        assert bigger.penalty_term < smaller.penalty_term

    def test_adding_correct_label_never_lowers_coverage(self):
        gt = {"i1": {"a", "b"}}
        without = estimate_accuracy("m", {"i1": {"a"}}, gt, n=1, label_space_size=4)
        with_extra = estimate_accuracy("m", {"i1": {"a", "b"}}, gt, n=1, label_space_size=4)
        assert with_extra.coverage_term >= without.coverage_term


class TestFullScore:
    @pytest.mark.parametrize("dataset_id,row", list(TABLE_ROWS.items()))
    def test_published_rows_sum_to_printed_full_scores(self, dataset_id, row):
        values, printed = row
        estimates = [
            ExpertiseEstimate.from_accuracy(f"m{i}", v) for i, v in enumerate(values)
        ]
        assert full_score(estimates, dataset_id).value == pytest.approx(printed, abs=1e-3)

    def test_hundred_class_row_sums_to_5_352_not_the_printed_value(self):
        estimates = [
            ExpertiseEstimate.from_accuracy(f"m{i}", v) for i, v in enumerate(CIFAR100_ROW)
        ]
        assert full_score(estimates, "cifar100").value == pytest.approx(5.352, abs=1e-3)

    def test_single_method_identity(self):
        est = ExpertiseEstimate.from_accuracy("only", 0.42)
        assert full_score([est]).value == 0.42

    def test_duplicate_method_raises(self):
        est = ExpertiseEstimate.from_accuracy("m", 0.5)
        with pytest.raises(ValueError):
            full_score([est, est])

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            full_score([])

    def test_permutation_invariant_within_tolerance(self):
        values = [0.777, 0.815, 0.676, 0.650, 0.973, 0.928, 0.975]
        estimates = [
            ExpertiseEstimate.from_accuracy(f"m{i}", v) for i, v in enumerate(values)
        ]
        brute = sum(values)
        for perm in itertools.islice(itertools.permutations(estimates), 30):
            assert full_score(list(perm)).value == pytest.approx(brute, abs=1e-9)
