import pytest

from relabel.synthetic import (
    SimulatedMethod,
    SyntheticSpec,
    default_spec,
    generate,
    recovery_experiment,
    run_recovery,
    spearman_rank_correlation,
)


def _spec(**overrides):
    base = dict(
        seed=5,
        image_count=30,
        label_space_size=12,
        methods=(
            SimulatedMethod(accuracy=0.9, volume_bias=2.0),
            SimulatedMethod(accuracy=0.6, volume_bias=2.0),
            SimulatedMethod(accuracy=0.3, volume_bias=2.0),
        ),
        multi_label_fraction=0.25,
        noisy_original_fraction=0.1,
    )
    base.update(overrides)
    return SyntheticSpec(**base)


class TestGenerate:
    def test_deterministic(self):
        p1, m1 = generate(_spec())
        p2, m2 = generate(_spec())
        assert p1 == p2
        assert m1 == m2

    def test_different_seed_differs(self):
        _, m1 = generate(_spec(seed=5))
        _, m2 = generate(_spec(seed=6))
        assert m1 != m2

    def test_perfect_predictor_emits_exactly_the_truth(self):
        spec = _spec(
            methods=(SimulatedMethod(accuracy=1.0, volume_bias=1.0),),
            multi_label_fraction=0.0,
        )
        planted, matrix = generate(spec)
        for image_id in matrix.images:
            assert set(matrix.labels_for(image_id, "sim00")) == set(planted.truth[image_id])

    def test_zero_accuracy_predictor_is_disjoint_from_truth(self):
        spec = _spec(methods=(SimulatedMethod(accuracy=0.0, volume_bias=3.0),))
        planted, matrix = generate(spec)
        for image_id in matrix.images:
            predicted = set(matrix.labels_for(image_id, "sim00"))
            assert predicted.isdisjoint(planted.truth[image_id])

    def test_origin_is_singleton_everywhere(self):
        planted, matrix = generate(_spec())
        for image_id in matrix.images:
            origin = matrix.labels_for(image_id, "origin")
            assert len(origin) == 1
            assert origin[0] == planted.originals[image_id]

    def test_truth_never_empty_and_originals_in_vocab(self):
        planted, matrix = generate(_spec(noisy_original_fraction=0.5))
        for image_id in matrix.images:
            assert planted.truth[image_id]
            assert planted.originals[image_id] in matrix.vocab


class TestSpearman:
    def test_perfect_agreement(self):
        assert spearman_rank_correlation([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)

    def test_perfect_reversal(self):
        assert spearman_rank_correlation([1, 2, 3], [30, 20, 10]) == pytest.approx(-1.0)

    def test_degenerate_is_none(self):
        assert spearman_rank_correlation([1.0, 1.0, 1.0], [1, 2, 3]) is None
        assert spearman_rank_correlation([1.0], [2.0]) is None

    def test_ties_use_average_ranks(self):
        # hand computation: x ranks (1.5, 1.5, 3), y ranks (1, 2, 3)
        rho = spearman_rank_correlation([5, 5, 9], [1, 2, 3])
        assert rho == pytest.approx(0.866025, abs=1e-5)

    def test_mismatched_lengths_raise(self):
        with pytest.raises(ValueError):
            spearman_rank_correlation([1], [1, 2])


class TestRecovery:
    def test_well_separated_accuracies_rank_correctly(self):
        report = run_recovery(_spec(image_count=60))
        assert report.spearman == pytest.approx(1.0)

    def test_identical_predictors_report_undefined_correlation(self):
        spec = _spec(
            methods=tuple(SimulatedMethod(accuracy=0.7, volume_bias=2.0) for _ in range(3))
        )
        report = run_recovery(spec)
        assert report.spearman is None

    def test_default_spec_shape(self):
        spec = default_spec(seed=0)
        assert spec.image_count == 100
        assert spec.label_space_size == 50
        assert len(spec.methods) == 6
        accs = [m.accuracy for m in spec.methods]
        assert min(accs) == 0.3 and max(accs) == 0.95

    def test_experiment_mostly_beats_best_single(self):
        reports = recovery_experiment(n_seeds=5, base_seed=400)
        wins = sum(1 for r in reports if r.ensemble_beats_best)
        assert wins >= 4
