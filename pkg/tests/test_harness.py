"""Trial protocol, fairness of the fixed-order source, and aggregation."""

import numpy as np
import pytest

from conftest import ScriptedStrategy
from palacs.datasets import generate_synthetic, make_trial_split
from palacs.harness import (
    TrialRecord,
    aggregate,
    phase_bounds,
    run_experiment,
    run_trial,
    strategy_seed,
)
from palacs.strategies import RandomStrategy


@pytest.fixture(scope="module")
def small_dataset():
    return generate_synthetic("3clusters", 130, seed=3)


class TestRunTrial:
    def test_zero_budget_gives_empty_record(self, small_dataset):
        split = make_trial_split(small_dataset, seed=0, budget=60)
        record = run_trial(split, ScriptedStrategy([0]), 0, 3)
        assert record.errors.shape == (0,)
        assert record.choices.shape == (0,)

    def test_choices_and_errors_recorded(self, small_dataset):
        split = make_trial_split(small_dataset, seed=1, budget=60)
        record = run_trial(
            split, ScriptedStrategy([0, 1, 2]), 12, 3, dataset_name="3clusters"
        )
        np.testing.assert_array_equal(record.choices, [0, 1, 2] * 4)
        assert np.all((record.errors >= 0) & (record.errors <= 1))
        assert record.dataset == "3clusters"

    def test_identical_choice_sequences_identical_errors(self, small_dataset):
        split = make_trial_split(small_dataset, seed=2, budget=60)
        a = run_trial(split, ScriptedStrategy([0, 1, 2, 1], label="A"), 20, 3)
        b = run_trial(split, ScriptedStrategy([0, 1, 2, 1], label="B"), 20, 3)
        assert np.array_equal(a.errors, b.errors)  # bit-exact

    def test_queue_exhaustion_is_hard_error(self, small_dataset):
        from palacs.exceptions import InternalConsistencyError

        split = make_trial_split(small_dataset, seed=3, budget=60)
        with pytest.raises(InternalConsistencyError, match="exhausted"):
            run_trial(split, ScriptedStrategy([0]), 81, 3)  # queue holds 80

    def test_random_strategy_visits_every_class(self, small_dataset):
        # 60 uniform draws over 3 classes miss a class with probability
        # ~7e-11, so 100 trials all covering every class is near-certain
        for trial in range(100):
            split = make_trial_split(small_dataset, seed=trial, budget=60)
            record = run_trial(
                split, RandomStrategy(3, random_state=trial), 60, 3
            )
            assert set(np.unique(record.choices)) == {0, 1, 2}


class TestPhaseBounds:
    def test_quarters_for_standard_budgets(self):
        assert phase_bounds(60) == ((1, 15), (16, 30), (31, 45), (46, 60))
        assert phase_bounds(80) == ((1, 20), (21, 40), (41, 60), (61, 80))
        assert phase_bounds(120) == ((1, 30), (31, 60), (61, 90), (91, 120))

    def test_remainder_goes_to_early_phases(self):
        assert phase_bounds(10) == ((1, 3), (4, 6), (7, 8), (9, 10))

    def test_partition_covers_budget(self):
        for budget in range(4, 40):
            bounds = phase_bounds(budget)
            steps = [s for lo, hi in bounds for s in range(lo, hi + 1)]
            assert steps == list(range(1, budget + 1))

    def test_too_small_budget(self):
        with pytest.raises(ValueError):
            phase_bounds(3)


def fake_record(strategy, trial_id, errors, choices=None, budget=None):
    errors = np.asarray(errors, dtype=np.float64)
    budget = errors.shape[0] if budget is None else budget
    if choices is None:
        choices = np.zeros(budget, dtype=np.int64)
    return TrialRecord(
        strategy=strategy,
        dataset="fake",
        trial_id=trial_id,
        errors=errors,
        choices=np.asarray(choices, dtype=np.int64),
    )


class TestAggregate:
    def test_single_strategy_wins_everything(self):
        records = [fake_record("solo", t, np.linspace(0.5, 0.1, 8)) for t in range(3)]
        report = aggregate(records, 2)
        np.testing.assert_array_equal(report.win_ratio["solo"], [1.0] * 4)

    def test_identical_records_tie_everywhere(self):
        errors = np.linspace(0.4, 0.2, 8)
        records = [fake_record("A", 0, errors), fake_record("B", 0, errors)]
        report = aggregate(records, 2)
        np.testing.assert_array_equal(report.win_ratio["A"], [1.0] * 4)
        np.testing.assert_array_equal(report.win_ratio["B"], [1.0] * 4)

    def test_win_and_tie_hand_count(self):
        # trial 0: A strictly better; trial 1: exact tie -> A 1.0, B 0.5
        records = [
            fake_record("A", 0, [0.2] * 8),
            fake_record("B", 0, [0.3] * 8),
            fake_record("A", 1, [0.25] * 8),
            fake_record("B", 1, [0.25] * 8),
        ]
        report = aggregate(records, 2)
        np.testing.assert_array_equal(report.win_ratio["A"], [1.0] * 4)
        np.testing.assert_array_equal(report.win_ratio["B"], [0.5] * 4)

    def test_curves_and_phase_means(self):
        records = [
            fake_record("A", 0, [0.4, 0.4, 0.2, 0.2]),
            fake_record("A", 1, [0.2, 0.2, 0.0, 0.0]),
        ]
        report = aggregate(records, 2)
        np.testing.assert_allclose(report.curve_mean["A"], [0.3, 0.3, 0.1, 0.1])
        np.testing.assert_allclose(report.curve_std["A"], [0.1, 0.1, 0.1, 0.1])
        np.testing.assert_allclose(report.phase_mean["A"], [0.3, 0.3, 0.1, 0.1])

    def test_sampling_shares_sum_to_one(self):
        records = [
            fake_record("A", t, np.ones(8) * 0.1, choices=[0, 1, 1, 2, 0, 1, 2, 2])
            for t in range(2)
        ]
        report = aggregate(records, 3)
        assert report.sampling["A"].sum() == pytest.approx(1.0)
        np.testing.assert_allclose(report.sampling["A"], [0.25, 0.375, 0.375])

    def test_mismatched_trials_rejected(self):
        records = [
            fake_record("A", 0, [0.1] * 4),
            fake_record("A", 1, [0.1] * 4),
            fake_record("B", 0, [0.1] * 4),
        ]
        with pytest.raises(ValueError, match="different set of trials"):
            aggregate(records, 2)

    def test_mismatched_budgets_rejected(self):
        records = [fake_record("A", 0, [0.1] * 4), fake_record("B", 0, [0.1] * 8)]
        with pytest.raises(ValueError, match="budget"):
            aggregate(records, 2)


class TestRunExperiment:
    def test_reproducible_bit_identical(self, small_dataset):
        runs = []
        for _ in range(2):
            records = run_experiment(
                small_dataset,
                ["pal-acs", "random"],
                trials=2,
                budget=20,
                base_seed=5,
            )
            runs.append(records)
        for a, b in zip(*runs):
            assert a.strategy == b.strategy and a.trial_id == b.trial_id
            assert np.array_equal(a.errors, b.errors)
            assert np.array_equal(a.choices, b.choices)

    def test_worker_pool_matches_serial(self, small_dataset):
        serial = run_experiment(
            small_dataset, ["random", "inverse"], trials=3, budget=16, base_seed=2
        )
        parallel = run_experiment(
            small_dataset,
            ["random", "inverse"],
            trials=3,
            budget=16,
            base_seed=2,
            workers=2,
        )
        for a, b in zip(serial, parallel):
            assert np.array_equal(a.errors, b.errors)
            assert np.array_equal(a.choices, b.choices)

    def test_duplicate_strategy_names_rejected(self, small_dataset):
        with pytest.raises(ValueError, match="unique"):
            run_experiment(
                small_dataset, ["random", "random"], trials=1, budget=8
            )

    def test_per_strategy_overrides(self, small_dataset):
        records = run_experiment(
            small_dataset,
            [("inverse", {"chunk_size": 9, "folds": 2})],
            trials=1,
            budget=16,
            base_seed=0,
        )
        assert records[0].strategy == "inverse"

    def test_learning_happens_on_easy_data(self, small_dataset):
        records = run_experiment(
            small_dataset, ["random"], trials=5, budget=40, base_seed=1
        )
        report = aggregate(records, 3)
        assert report.phase_mean["random"][3] < report.phase_mean["random"][0]


class TestStrategySeed:
    def test_stable_and_distinct(self):
        assert strategy_seed(0, 3, "random") == strategy_seed(0, 3, "random")
        assert strategy_seed(0, 3, "random") != strategy_seed(0, 3, "pal-acs")
        assert strategy_seed(0, 3, "random") != strategy_seed(0, 4, "random")
