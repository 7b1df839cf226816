"""Synthetic generators, tabular loading, normalization, and trial splits."""

import numpy as np
import pytest

from palacs.datasets import (
    DEFAULT_BUDGETS,
    Dataset,
    generate_synthetic,
    load_tabular,
    make_trial_split,
    minmax_normalize,
)
from palacs.exceptions import DatasetError


class TestSyntheticGenerators:
    @pytest.mark.parametrize("name", ["3clusters", "spirals", "bars"])
    def test_shape_and_range(self, name):
        ds = generate_synthetic(name, 150, seed=3)
        assert ds.X.shape == (450, 2)
        assert ds.num_classes == 3
        assert ds.budget == DEFAULT_BUDGETS[name]
        assert ds.X.min() == 0.0 and ds.X.max() == 1.0
        np.testing.assert_array_equal(ds.class_counts(), [150, 150, 150])

    def test_deterministic_and_seed_sensitive(self):
        a = generate_synthetic("spirals", 120, seed=5)
        b = generate_synthetic("spirals", 120, seed=5)
        c = generate_synthetic("spirals", 120, seed=6)
        np.testing.assert_array_equal(a.X, b.X)
        assert not np.array_equal(a.X, c.X)

    def test_three_clusters_easy_class_is_separated(self):
        for seed in range(5):
            ds = generate_synthetic("3clusters", 200, seed=seed)
            means = [ds.X[ds.y == c].mean(axis=0) for c in range(3)]
            assert np.linalg.norm(means[0] - means[1]) >= 0.3
            assert np.linalg.norm(means[0] - means[2]) >= 0.3

    def test_bars_easy_class_support_disjoint(self):
        for seed in range(5):
            ds = generate_synthetic("bars", 200, seed=seed)
            hard_max = ds.X[ds.y != 2][:, 0].max()
            easy_min = ds.X[ds.y == 2][:, 0].min()
            assert easy_min > hard_max

    def test_spirals_easy_class_is_remote(self):
        ds = generate_synthetic("spirals", 200, seed=1)
        easy = ds.X[ds.y == 0]
        hard = ds.X[ds.y != 0]
        gaps = np.sqrt(
            ((easy[:, None, :] - hard[None, :, :]) ** 2).sum(-1)
        )
        assert gaps.min() > 0.2

    def test_unknown_name(self):
        with pytest.raises(DatasetError, match="unknown synthetic"):
            generate_synthetic("circles", 200, seed=0)

    def test_too_few_instances(self):
        with pytest.raises(DatasetError, match="instances_per_class"):
            generate_synthetic("bars", 80, seed=0)


class TestNormalization:
    def test_idempotent(self):
        rng = np.random.default_rng(4)
        X = rng.normal(3.0, 2.0, size=(50, 3))
        once = minmax_normalize(X)
        np.testing.assert_array_equal(minmax_normalize(once), once)

    def test_endpoints(self):
        X = np.array([[0.0, 5.0], [10.0, 15.0]])
        np.testing.assert_array_equal(
            minmax_normalize(X), [[0.0, 0.0], [1.0, 1.0]]
        )

    def test_constant_feature_rejected(self):
        with pytest.raises(DatasetError):
            minmax_normalize(np.ones((10, 2)))


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def balanced_rows(rng, per_class=70, labels=("a", "b")):
    rows = []
    for label in labels:
        for _ in range(per_class):
            rows.append([rng.uniform(), rng.uniform(0, 10), label])
    return rows


class TestTabularLoader:
    def test_basic_load(self, tmp_path):
        rng = np.random.default_rng(0)
        path = tmp_path / "data.csv"
        write_csv(path, ["f1", "f2", "label"], balanced_rows(rng))
        ds = load_tabular(path, "label")
        assert ds.num_classes == 2
        assert ds.class_names == ("a", "b")
        assert ds.X.shape == (140, 2)
        assert ds.X.min() == 0.0 and ds.X.max() == 1.0
        assert ds.name == "data"
        assert ds.budget == 60

    def test_minmax_endpoints_on_binary_feature(self, tmp_path):
        rng = np.random.default_rng(1)
        rows = [[(i % 2) * 10, rng.uniform(), "a" if i < 70 else "b"]
                for i in range(140)]
        path = tmp_path / "data.csv"
        write_csv(path, ["f1", "f2", "label"], rows)
        ds = load_tabular(path, "label")
        assert set(np.unique(ds.X[:, 0])) == {0.0, 1.0}

    def test_class_filter_and_first_appearance_order(self, tmp_path):
        rng = np.random.default_rng(2)
        rows = balanced_rows(rng, labels=("z", "m", "q"))
        path = tmp_path / "data.csv"
        write_csv(path, ["f1", "f2", "label"], rows)
        ds = load_tabular(path, "label", class_filter=["q", "z"])
        assert ds.class_names == ("z", "q")  # file order, not filter order
        assert ds.num_classes == 2
        np.testing.assert_array_equal(np.unique(ds.y), [0, 1])

    def test_non_numeric_column_dropped_with_warning(self, tmp_path):
        rng = np.random.default_rng(3)
        rows = [[x, "red", y, label] for x, y, label in balanced_rows(rng)]
        path = tmp_path / "data.csv"
        write_csv(path, ["f1", "color", "f2", "label"], rows)
        with pytest.warns(UserWarning, match="color"):
            ds = load_tabular(path, "label")
        assert ds.X.shape[1] == 2

    def test_constant_column_dropped_with_warning(self, tmp_path):
        rng = np.random.default_rng(4)
        rows = [[x, 7.0, y, label] for x, y, label in balanced_rows(rng)]
        path = tmp_path / "data.csv"
        write_csv(path, ["f1", "fixed", "f2", "label"], rows)
        with pytest.warns(UserWarning, match="fixed"):
            ds = load_tabular(path, "label")
        assert ds.X.shape[1] == 2

    def test_missing_values_rejected_with_count(self, tmp_path):
        rng = np.random.default_rng(5)
        rows = balanced_rows(rng)
        rows[3][0] = ""
        rows[10][1] = ""
        path = tmp_path / "data.csv"
        write_csv(path, ["f1", "f2", "label"], rows)
        with pytest.warns(UserWarning, match="2 row"):
            ds = load_tabular(path, "label")
        assert ds.X.shape[0] == 138

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="not found"):
            load_tabular(tmp_path / "nope.csv", "label")

    def test_missing_label_column(self, tmp_path):
        path = tmp_path / "data.csv"
        write_csv(path, ["f1", "f2", "label"], balanced_rows(np.random.default_rng(6)))
        with pytest.raises(DatasetError, match="'target'"):
            load_tabular(path, "target")

    def test_thin_class_rejected(self, tmp_path):
        rng = np.random.default_rng(7)
        rows = balanced_rows(rng) + [[rng.uniform(), rng.uniform(), "rare"]] * 10
        path = tmp_path / "data.csv"
        write_csv(path, ["f1", "f2", "label"], rows)
        with pytest.raises(DatasetError, match="rare"):
            load_tabular(path, "label")

    def test_named_dataset_budget_lookup(self, tmp_path):
        rng = np.random.default_rng(8)
        path = tmp_path / "vehicle.csv"
        write_csv(path, ["f1", "f2", "label"], balanced_rows(rng, per_class=200))
        assert load_tabular(path, "label").budget == 80
        assert load_tabular(path, "label", budget=44).budget == 44


class TestTrialSplit:
    def test_test_counts_and_disjointness(self):
        ds = generate_synthetic("3clusters", 130, seed=2)
        split = make_trial_split(ds, seed=9, budget=60)
        np.testing.assert_array_equal(
            np.bincount(split.y_test, minlength=3), [50, 50, 50]
        )
        test_rows = {tuple(row) for row in split.X_test}
        for queue in split.queues:
            assert len(queue) == 80
            assert not test_rows & {tuple(row) for row in queue}

    def test_deterministic_and_fixed_order(self):
        ds = generate_synthetic("bars", 180, seed=2)
        a = make_trial_split(ds, seed=4)
        b = make_trial_split(ds, seed=4)
        np.testing.assert_array_equal(a.X_test, b.X_test)
        for qa, qb in zip(a.queues, b.queues):
            np.testing.assert_array_equal(qa, qb)
        c = make_trial_split(ds, seed=5)
        assert not np.array_equal(a.X_test, c.X_test)

    def test_shallow_queue_fails_before_run(self):
        ds = generate_synthetic("3clusters", 120, seed=1)  # 70 left per class
        with pytest.raises(DatasetError, match="budget"):
            make_trial_split(ds, seed=0, budget=80)

    def test_class_with_too_few_instances(self):
        rng = np.random.default_rng(3)
        X = rng.uniform(size=(140, 2))
        y = np.array([0] * 100 + [1] * 40)
        ds = Dataset(name="tiny", X=X, y=y, num_classes=2, budget=10)
        with pytest.raises(DatasetError, match="class 1"):
            make_trial_split(ds, seed=0)
