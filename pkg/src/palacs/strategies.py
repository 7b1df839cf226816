"""Class-selection strategies: which class should the next instance come from.

Every strategy maps the current labeled set to a class index.  Strategies
are sklearn-style estimators: constructor parameters are stored verbatim
(so ``clone``/``get_params`` work) and all mutable per-run state lives in
attributes created by :meth:`reset`.  One instance serves one acquisition
run; runs in parallel each get their own instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.model_selection import StratifiedKFold

from .exceptions import InternalConsistencyError
from .gain import DEFAULT_LOCAL_BUDGET, performance_gain_batch
from .kernel import (
    DEFAULT_BANDWIDTH,
    ParzenWindowClassifier,
    kernel_frequencies,
    sample_pseudo_instances,
)

DEFAULT_PSEUDO_PER_CLASS = 25
DEFAULT_FOLDS = 3


@dataclass(frozen=True)
class StrategyDecision:
    """A chosen class plus optional per-class diagnostic scores."""

    chosen_class: int
    scores: np.ndarray | None = None


def weighted_class_scores(gains, freqs) -> np.ndarray:
    """Fold per-pseudo-instance gains into one score per class.

    score[c] = sum_i gains[i] * freqs[i, c] / sum_j freqs[j, c]

    i.e. each pseudo instance contributes its gain weighted by how strongly
    it belongs to class c, with the class column normalized across pseudo
    instances.  Accumulation runs in ascending i for every class, so the
    result is reproducible bit-for-bit from the same inputs.
    """
    gains = np.asarray(gains, dtype=np.float64)
    freqs = np.asarray(freqs, dtype=np.float64)
    n, num_classes = freqs.shape
    scores = np.zeros(num_classes, dtype=np.float64)
    for c in range(num_classes):
        total = 0.0
        for i in range(n):
            total += freqs[i, c]
        acc = 0.0
        for i in range(n):
            acc += gains[i] * freqs[i, c] / total
        scores[c] = acc
    return scores


def largest_remainder_allocation(weights, total: int) -> np.ndarray:
    """Round target proportions `weights / sum(weights)` to integers summing to `total`.

    Floors every target, then hands the leftover units to the largest
    fractional remainders; remainder ties go to the lowest class index.
    """
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be non-negative with a positive sum")
    target = total * w / w.sum()
    alloc = np.floor(target).astype(np.int64)
    leftover = total - int(alloc.sum())
    if leftover:
        remainder = target - alloc
        order = np.lexsort((np.arange(w.shape[0]), -remainder))
        alloc[order[:leftover]] += 1
    return alloc


def _serving_order(allocation: np.ndarray) -> list[int]:
    """Round-robin order over classes with remaining allocation."""
    remaining = allocation.copy()
    order: list[int] = []
    while remaining.sum() > 0:
        for c in range(remaining.shape[0]):
            if remaining[c] > 0:
                order.append(c)
                remaining[c] -= 1
    return order


def _lowest_underfilled(y, num_classes: int, minimum: int) -> int | None:
    """Lowest class index with fewer than `minimum` instances, if any."""
    counts = np.bincount(np.asarray(y, dtype=np.int64), minlength=num_classes)
    below = np.nonzero(counts[:num_classes] < minimum)[0]
    return int(below[0]) if below.size else None


class ClassSelectionStrategy(BaseEstimator):
    """Base class: owns the run RNG and the reset/select lifecycle."""

    name: str = "base"

    def reset(self) -> None:
        """Start a fresh acquisition run; clears all mutable state."""
        self._rng = np.random.default_rng(self.random_state)
        self._setup()

    def _setup(self) -> None:
        pass

    def _ensure_started(self) -> None:
        if not hasattr(self, "_rng"):
            self.reset()

    def select(self, X, y) -> StrategyDecision:
        """Choose the class for the next instance request."""
        raise NotImplementedError


class RandomStrategy(ClassSelectionStrategy):
    """Request each class with equal probability."""

    name = "random"

    def __init__(self, num_classes: int, random_state=None):
        self.num_classes = num_classes
        self.random_state = random_state

    def select(self, X, y) -> StrategyDecision:
        self._ensure_started()
        return StrategyDecision(int(self._rng.integers(self.num_classes)))


class PalAcsStrategy(ClassSelectionStrategy):
    """Pick the class whose region of the feature space promises the largest
    expected accuracy gain per acquired label.

    Each step samples `pseudo_per_class` points from every class's kernel
    density estimate, evaluates the expected-accuracy gain of an extra label
    at each point from its kernel frequencies, divides by the number of
    pseudo points (density weight), and aggregates the gains per class with
    normalized class-membership weights.  While any class has no instances
    at all, the lowest-index empty class is requested instead (cold start).

    Parameters
    ----------
    num_classes : int
        Number of classes.
    bandwidth : float, default=0.05
        Kernel width shared by the frequency estimate and the KDE sampler.
    pseudo_per_class : int, default=25
        Pseudo instances sampled from each class per step.
    local_budget_max : int, default=3
        Largest number of hypothetical labels considered by the gain.
    random_state : int, optional
        Seed for the pseudo-instance sampler.
    """

    name = "pal-acs"

    def __init__(
        self,
        num_classes: int,
        bandwidth: float = DEFAULT_BANDWIDTH,
        pseudo_per_class: int = DEFAULT_PSEUDO_PER_CLASS,
        local_budget_max: int = DEFAULT_LOCAL_BUDGET,
        random_state=None,
    ):
        self.num_classes = num_classes
        self.bandwidth = bandwidth
        self.pseudo_per_class = pseudo_per_class
        self.local_budget_max = local_budget_max
        self.random_state = random_state

    def select(self, X, y) -> StrategyDecision:
        self._ensure_started()
        cold = _lowest_underfilled(y, self.num_classes, 1)
        if cold is not None:
            return StrategyDecision(cold)
        pseudo = sample_pseudo_instances(
            X,
            y,
            self.num_classes,
            self.pseudo_per_class,
            self.bandwidth,
            rng=self._rng,
        )
        freqs = kernel_frequencies(pseudo, X, y, self.num_classes, self.bandwidth)
        gains = performance_gain_batch(freqs, self.local_budget_max)
        gains = gains / pseudo.shape[0]
        if np.any(freqs.sum(axis=0) <= 0.0):
            raise InternalConsistencyError(
                "a class-conditional weight normalizer is zero although every "
                "class has instances"
            )
        scores = weighted_class_scores(gains, freqs)
        return StrategyDecision(int(np.argmax(scores)), scores)


class _ChunkedStrategy(ClassSelectionStrategy):
    """Shared machinery for strategies that plan whole acquisition chunks.

    Cold start: while any class has fewer than `folds` instances, the
    lowest-index such class is requested.  Afterwards, at every chunk
    boundary the subclass computes per-class weights, the weights are
    rounded to an integer allocation of `chunk_size` requests, and the
    allocation is served round-robin.
    """

    def __init__(
        self,
        num_classes: int,
        bandwidth: float = DEFAULT_BANDWIDTH,
        chunk_size: int | None = None,
        folds: int = DEFAULT_FOLDS,
        random_state=None,
    ):
        self.num_classes = num_classes
        self.bandwidth = bandwidth
        self.chunk_size = chunk_size
        self.folds = folds
        self.random_state = random_state

    def _setup(self) -> None:
        self._pending: list[int] = []
        self._last_boundary_size = 0
        self.allocations_: list[np.ndarray] = []
        self.weight_history_: list[np.ndarray] = []

    def _effective_chunk_size(self) -> int:
        size = self.chunk_size if self.chunk_size is not None else 2 * self.num_classes
        if size < self.num_classes:
            raise ValueError("chunk_size must be at least num_classes")
        return size

    def _chunk_weights(self, X, y) -> np.ndarray:
        raise NotImplementedError

    def select(self, X, y) -> StrategyDecision:
        self._ensure_started()
        cold = _lowest_underfilled(y, self.num_classes, self.folds)
        if cold is not None:
            return StrategyDecision(cold)
        if not self._pending:
            X = np.asarray(X, dtype=np.float64)
            y = np.asarray(y, dtype=np.int64)
            weights = self._chunk_weights(X, y)
            self.weight_history_.append(weights)
            allocation = largest_remainder_allocation(
                weights, self._effective_chunk_size()
            )
            self.allocations_.append(allocation)
            self._pending = _serving_order(allocation)
            self._last_boundary_size = X.shape[0]
        return StrategyDecision(self._pending.pop(0))


class InverseStrategy(_ChunkedStrategy):
    """Allocate the next chunk inversely to cross-validated class accuracy.

    At each chunk boundary a stratified `folds`-fold cross validation with
    the Parzen classifier yields per-class accuracies; the target proportion
    of class c is 1 / max(acc_c, 1 / (n_c + 2)), so perfectly-learned classes
    get little and struggling classes get much, with a floor that prevents
    infinite weights and shrinks as class evidence n_c grows.
    """

    name = "inverse"

    def _chunk_weights(self, X, y) -> np.ndarray:
        num_classes = self.num_classes
        splitter = StratifiedKFold(
            n_splits=self.folds,
            shuffle=True,
            random_state=int(self._rng.integers(2**31)),
        )
        correct = np.zeros(num_classes)
        totals = np.zeros(num_classes)
        for train_idx, test_idx in splitter.split(X, y):
            clf = ParzenWindowClassifier(
                bandwidth=self.bandwidth, classes=np.arange(num_classes)
            ).fit(X[train_idx], y[train_idx])
            pred = clf.predict(X[test_idx])
            np.add.at(totals, y[test_idx], 1.0)
            np.add.at(correct, y[test_idx], (pred == y[test_idx]).astype(np.float64))
        accuracy = correct / np.maximum(totals, 1.0)
        floor = 1.0 / (totals + 2.0)
        return 1.0 / np.maximum(accuracy, floor)


class RedistrictingStrategy(_ChunkedStrategy):
    """Allocate the next chunk toward classes whose instances flip predictions.

    At each chunk boundary every instance seen before the most recent chunk
    is classified twice: by a Parzen classifier trained without the chunk and
    by one trained with it.  Instances whose predictions differ are counted
    per TRUE class, and the next chunk's target proportions follow those
    counts with add-one smoothing (an all-stable boundary yields a uniform
    chunk).
    """

    name = "redistricting"

    def _chunk_weights(self, X, y) -> np.ndarray:
        flips = np.zeros(self.num_classes)
        prev = self._last_boundary_size
        if prev > 0:
            old_X, old_y = X[:prev], y[:prev]
            before = ParzenWindowClassifier(
                bandwidth=self.bandwidth, classes=np.arange(self.num_classes)
            ).fit(old_X, old_y)
            after = ParzenWindowClassifier(
                bandwidth=self.bandwidth, classes=np.arange(self.num_classes)
            ).fit(X, y)
            changed = before.predict(old_X) != after.predict(old_X)
            flips = np.bincount(
                old_y[changed], minlength=self.num_classes
            ).astype(np.float64)
        return flips + 1.0


STRATEGIES: dict[str, type[ClassSelectionStrategy]] = {
    "pal-acs": PalAcsStrategy,
    "random": RandomStrategy,
    "inverse": InverseStrategy,
    "redistricting": RedistrictingStrategy,
}


def make_strategy(name: str, num_classes: int, **params) -> ClassSelectionStrategy:
    """Instantiate a strategy by its registry name.

    `params` may contain any of the union of strategy parameters; keys a
    strategy does not accept are ignored, so one config dict can drive all
    strategies.
    """
    try:
        cls = STRATEGIES[name]
    except KeyError:
        known = ", ".join(sorted(STRATEGIES))
        raise ValueError(f"unknown strategy {name!r}; expected one of: {known}")
    accepted = cls(num_classes=2).get_params().keys()
    kwargs = {k: v for k, v in params.items() if k in accepted}
    return cls(num_classes=num_classes, **kwargs)
