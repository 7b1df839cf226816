"""Dataset generation, tabular ingestion, and per-trial test/queue splits.

All datasets are min-max normalized to the unit hypercube per feature, so a
single kernel bandwidth is meaningful across them.  Each synthetic recipe
has one easy class and two classes with an entangled decision boundary.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import DatasetError

TEST_PER_CLASS = 50

DEFAULT_BUDGETS = {
    "3clusters": 60,
    "vertebral": 60,
    "yeast": 60,
    "vehicle": 80,
    "bars": 120,
    "spirals": 120,
}

SYNTHETIC_NAMES = ("3clusters", "spirals", "bars")

_MIN_INSTANCES_PER_CLASS = 110  # 50 test + headroom for the smallest budget


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable normalized dataset plus its default acquisition budget."""

    name: str
    X: np.ndarray
    y: np.ndarray
    num_classes: int
    budget: int
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.class_names:
            object.__setattr__(
                self, "class_names", tuple(str(c) for c in range(self.num_classes))
            )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.num_classes)


@dataclass(frozen=True, eq=False)
class TrialSplit:
    """A fixed test set plus one fixed-order training queue per class.

    The queues implement the instance source: a strategy requesting class c
    receives the queue's next instance, so two strategies requesting the
    same class sequence obtain identical training sets.
    """

    X_test: np.ndarray
    y_test: np.ndarray
    queues: tuple[np.ndarray, ...]


def minmax_normalize(X: np.ndarray) -> np.ndarray:
    """Scale each column to [0, 1]; idempotent on already-normalized data."""
    X = np.asarray(X, dtype=np.float64)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    if np.any(span <= 0):
        raise DatasetError("cannot normalize a constant feature")
    return (X - lo) / span


def _three_clusters(per_class: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # One tight isolated cluster, two overlapping ones.
    easy = rng.normal([0.0, 0.0], 0.5, size=(per_class, 2))
    hard1 = rng.normal([3.0, 0.0], 0.8, size=(per_class, 2))
    hard2 = rng.normal([4.2, 0.0], 0.8, size=(per_class, 2))
    X = np.concatenate([easy, hard1, hard2])
    y = np.repeat(np.arange(3), per_class)
    return X, y


def _spirals(per_class: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # Two interleaved spiral arms; the easy class sits far outside their box.
    def arm(phase: float) -> np.ndarray:
        theta = rng.uniform(0.0, 3.0 * np.pi, size=per_class)
        radius = 0.25 + 0.5 * theta / (3.0 * np.pi)
        pts = np.column_stack(
            [radius * np.cos(theta + phase), radius * np.sin(theta + phase)]
        )
        return pts + rng.normal(0.0, 0.03, size=pts.shape)

    hard1 = arm(0.0)
    hard2 = arm(np.pi)
    arms = np.concatenate([hard1, hard2])
    lo, hi = arms.min(axis=0), arms.max(axis=0)
    diagonal = float(np.linalg.norm(hi - lo))
    center = (lo + hi) / 2.0 + 1.5 * diagonal * np.array([1.0, 1.0]) / np.sqrt(2.0)
    easy = rng.normal(center, 0.1, size=(per_class, 2))
    X = np.concatenate([easy, hard1, hard2])
    y = np.repeat(np.arange(3), per_class)
    return X, y


def _bars(per_class: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # Two unit rectangles overlapping in a 20%-wide band; the easy rectangle
    # sits one rectangle-width away.
    hard1 = np.column_stack(
        [rng.uniform(0.0, 1.0, per_class), rng.uniform(0.0, 1.0, per_class)]
    )
    hard2 = np.column_stack(
        [rng.uniform(0.8, 1.8, per_class), rng.uniform(0.0, 1.0, per_class)]
    )
    easy = np.column_stack(
        [rng.uniform(2.8, 3.8, per_class), rng.uniform(0.0, 1.0, per_class)]
    )
    X = np.concatenate([hard1, hard2, easy])
    y = np.repeat(np.arange(3), per_class)
    return X, y


_GENERATORS = {
    "3clusters": _three_clusters,
    "spirals": _spirals,
    "bars": _bars,
}


def generate_synthetic(name: str, instances_per_class: int, seed: int) -> Dataset:
    """Generate one of the named 2-D, 3-class synthetic datasets.

    Deterministic given `seed`.  Features are normalized to [0, 1].
    """
    if name not in _GENERATORS:
        raise DatasetError(
            f"unknown synthetic dataset {name!r}; expected one of: "
            + ", ".join(SYNTHETIC_NAMES)
        )
    if instances_per_class < _MIN_INSTANCES_PER_CLASS:
        raise DatasetError(
            f"instances_per_class must be >= {_MIN_INSTANCES_PER_CLASS}"
        )
    rng = np.random.default_rng(seed)
    X, y = _GENERATORS[name](instances_per_class, rng)
    return Dataset(
        name=name,
        X=minmax_normalize(X),
        y=y.astype(np.int64),
        num_classes=3,
        budget=DEFAULT_BUDGETS[name],
    )


def load_tabular(
    path,
    label_column: str,
    class_filter=None,
    name: str | None = None,
    budget: int | None = None,
) -> Dataset:
    """Load a comma-separated file with a header row into a Dataset.

    Numeric columns become features (non-numeric ones are dropped with a
    warning), rows with missing values are rejected with a counted warning,
    class labels map to indices in order of first appearance, and features
    are min-max normalized.  Constant features are dropped with a warning.

    Raises
    ------
    DatasetError
        Missing file or label column, no usable features, or any kept class
        having fewer than 60 instances (too few for a 50-instance test set).
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    frame = pd.read_csv(path)
    if label_column not in frame.columns:
        raise DatasetError(f"label column {label_column!r} not present in {path}")

    labels = frame[label_column]
    features = frame.drop(columns=[label_column])

    non_numeric = [
        col for col in features.columns
        if not pd.api.types.is_numeric_dtype(features[col])
    ]
    if non_numeric:
        warnings.warn(
            f"dropping non-numeric feature column(s): {', '.join(non_numeric)}"
        )
        features = features.drop(columns=non_numeric)
    if features.shape[1] == 0:
        raise DatasetError("no numeric feature columns left after filtering")

    incomplete = features.isna().any(axis=1) | labels.isna()
    if incomplete.any():
        warnings.warn(f"rejecting {int(incomplete.sum())} row(s) with missing values")
        features = features.loc[~incomplete]
        labels = labels.loc[~incomplete]

    if class_filter is not None:
        keep = labels.isin(list(class_filter))
        features = features.loc[keep]
        labels = labels.loc[keep]
        if labels.empty:
            raise DatasetError("class filter removed every row")

    class_names = tuple(str(label) for label in pd.unique(labels))
    index_of = {label: i for i, label in enumerate(pd.unique(labels))}
    y = labels.map(index_of).to_numpy(dtype=np.int64)

    X = features.to_numpy(dtype=np.float64)
    span = X.max(axis=0) - X.min(axis=0)
    constant = span <= 0
    if constant.any():
        dropped = [str(c) for c, flag in zip(features.columns, constant) if flag]
        warnings.warn(f"dropping constant feature column(s): {', '.join(dropped)}")
        X = X[:, ~constant]
        if X.shape[1] == 0:
            raise DatasetError("every feature column is constant")

    counts = np.bincount(y, minlength=len(class_names))
    thin = counts < TEST_PER_CLASS + 10
    if thin.any():
        offenders = ", ".join(
            f"{class_names[i]} ({counts[i]})" for i in np.nonzero(thin)[0]
        )
        raise DatasetError(
            f"classes with fewer than {TEST_PER_CLASS + 10} instances: {offenders}"
        )

    resolved_name = name if name is not None else path.stem
    if budget is None:
        budget = DEFAULT_BUDGETS.get(resolved_name.lower(), 60)
    return Dataset(
        name=resolved_name,
        X=minmax_normalize(X),
        y=y,
        num_classes=len(class_names),
        budget=budget,
        class_names=class_names,
    )


def make_trial_split(ds: Dataset, seed: int, budget: int | None = None) -> TrialSplit:
    """Sample a 50-per-class test set and shuffle the rest into fixed queues.

    Deterministic given `seed`.  Fails early when any class cannot supply
    both the test instances and a queue deep enough for the budget (a
    strategy may request a single class for the entire run).
    """
    budget = ds.budget if budget is None else budget
    test_parts, queue_parts = [], []
    for c in range(ds.num_classes):
        idx = np.nonzero(ds.y == c)[0]
        if idx.shape[0] <= TEST_PER_CLASS:
            raise DatasetError(
                f"class {ds.class_names[c]} has {idx.shape[0]} instances; "
                f"> {TEST_PER_CLASS} required"
            )
        if idx.shape[0] - TEST_PER_CLASS < budget:
            raise DatasetError(
                f"class {ds.class_names[c]} leaves {idx.shape[0] - TEST_PER_CLASS} "
                f"training instances but the budget is {budget}"
            )
    rng = np.random.default_rng(seed)
    for c in range(ds.num_classes):
        idx = np.nonzero(ds.y == c)[0]
        order = rng.permutation(idx)
        test_parts.append(order[:TEST_PER_CLASS])
        queue_parts.append(ds.X[order[TEST_PER_CLASS:]])
    X_test = np.concatenate([ds.X[part] for part in test_parts])
    y_test = np.repeat(np.arange(ds.num_classes), TEST_PER_CLASS)
    return TrialSplit(X_test=X_test, y_test=y_test, queues=tuple(queue_parts))
