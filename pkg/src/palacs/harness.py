"""Experiment protocol: acquisition trials, aggregation, and phase reports.

One trial fixes a test set and per-class training queues, then lets a
strategy acquire `budget` instances one at a time; after every acquisition
the test error of a Parzen classifier on the training prefix is recorded.
All strategies in a run share the same trial splits, so two strategies that
request the same class sequence train on identical data.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .datasets import Dataset, TrialSplit, make_trial_split
from .exceptions import InternalConsistencyError
from .kernel import DEFAULT_BANDWIDTH, ParzenWindowClassifier
from .strategies import ClassSelectionStrategy, make_strategy

NUM_PHASES = 4


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """Per-step test errors and class choices for one strategy on one trial."""

    strategy: str
    dataset: str
    trial_id: int
    errors: np.ndarray
    choices: np.ndarray


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Aggregated learning curves, phase statistics, and sampling shares."""

    dataset: str
    strategies: tuple[str, ...]
    num_classes: int
    budget: int
    trials: int
    phase_bounds: tuple[tuple[int, int], ...]  # 1-based inclusive step ranges
    curve_mean: dict[str, np.ndarray]
    curve_std: dict[str, np.ndarray]
    phase_mean: dict[str, np.ndarray]
    win_ratio: dict[str, np.ndarray]
    sampling: dict[str, np.ndarray]  # per-class share of acquisitions, sums to 1


def strategy_seed(base_seed: int, trial_id: int, name: str) -> int:
    """Trial seed plus a stable per-strategy offset.

    The trial seed (base_seed + trial_id) drives the shared split; XOR-ing a
    CRC32 of the strategy name decorrelates strategy-internal randomness
    across strategies without breaking reproducibility.
    """
    return (base_seed + trial_id) ^ zlib.crc32(name.encode("utf-8"))


def run_trial(
    split: TrialSplit,
    strategy: ClassSelectionStrategy,
    budget: int,
    num_classes: int,
    bandwidth: float = DEFAULT_BANDWIDTH,
    dataset_name: str = "",
    trial_id: int = 0,
) -> TrialRecord:
    """Run one acquisition trial and record per-step error and choices.

    The strategy is reset first, so a fresh or reused instance behaves the
    same.  Raises :class:`InternalConsistencyError` if a queue runs dry
    (split construction normally precludes this).
    """
    strategy.reset()
    dim = split.X_test.shape[1]
    X_train = np.empty((budget, dim), dtype=np.float64)
    y_train = np.empty(budget, dtype=np.int64)
    errors = np.empty(budget, dtype=np.float64)
    choices = np.empty(budget, dtype=np.int64)
    cursors = [0] * num_classes
    evaluator = ParzenWindowClassifier(
        bandwidth=bandwidth, classes=np.arange(num_classes)
    )
    for step in range(budget):
        decision = strategy.select(X_train[:step], y_train[:step])
        chosen = decision.chosen_class
        if not 0 <= chosen < num_classes:
            raise InternalConsistencyError(
                f"strategy {strategy.name!r} chose invalid class {chosen}"
            )
        queue = split.queues[chosen]
        if cursors[chosen] >= queue.shape[0]:
            raise InternalConsistencyError(
                f"training queue for class {chosen} exhausted at step {step + 1}"
            )
        X_train[step] = queue[cursors[chosen]]
        y_train[step] = chosen
        cursors[chosen] += 1
        evaluator.fit(X_train[: step + 1], y_train[: step + 1])
        predictions = evaluator.predict(split.X_test)
        errors[step] = float(np.mean(predictions != split.y_test))
        choices[step] = chosen
    return TrialRecord(
        strategy=strategy.name,
        dataset=dataset_name,
        trial_id=trial_id,
        errors=errors,
        choices=choices,
    )


def _run_one_trial(
    ds: Dataset,
    strategy_specs: list[tuple[str, dict]],
    trial_id: int,
    budget: int,
    base_seed: int,
    bandwidth: float,
) -> list[TrialRecord]:
    split = make_trial_split(ds, seed=base_seed + trial_id, budget=budget)
    records = []
    for name, params in strategy_specs:
        strategy = make_strategy(
            name,
            ds.num_classes,
            random_state=strategy_seed(base_seed, trial_id, name),
            bandwidth=bandwidth,
            **params,
        )
        records.append(
            run_trial(
                split,
                strategy,
                budget=budget,
                num_classes=ds.num_classes,
                bandwidth=bandwidth,
                dataset_name=ds.name,
                trial_id=trial_id,
            )
        )
    return records


def run_experiment(
    ds: Dataset,
    strategies,
    trials: int,
    budget: int | None = None,
    base_seed: int = 0,
    bandwidth: float = DEFAULT_BANDWIDTH,
    workers: int = 1,
) -> list[TrialRecord]:
    """Run every strategy over `trials` shared trial splits.

    Parameters
    ----------
    ds : Dataset
    strategies : sequence
        Strategy names, or (name, params-dict) pairs with per-strategy
        overrides (e.g. pseudo_per_class, chunk_size, folds).
    trials : int
        Number of test/queue splits; trial i uses seed base_seed + i.
    budget : int, optional
        Acquisitions per trial; defaults to the dataset's budget.
    base_seed : int
        Root of all trial and strategy seeds.
    bandwidth : float
        Kernel width for strategies and the evaluation classifier.
    workers : int
        Trials run in parallel when > 1; results are independent of the
        execution order.

    Returns
    -------
    list[TrialRecord], ordered by trial then by strategy.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    budget = ds.budget if budget is None else budget
    specs = [
        (spec, {}) if isinstance(spec, str) else (spec[0], dict(spec[1]))
        for spec in strategies
    ]
    names = [name for name, _ in specs]
    if len(set(names)) != len(names):
        raise ValueError("strategy names must be unique within one experiment")
    # Validates queue depth before any work starts.
    make_trial_split(ds, seed=base_seed, budget=budget)

    if workers == 1:
        nested = [
            _run_one_trial(ds, specs, t, budget, base_seed, bandwidth)
            for t in range(trials)
        ]
    else:
        nested = Parallel(n_jobs=workers)(
            delayed(_run_one_trial)(ds, specs, t, budget, base_seed, bandwidth)
            for t in range(trials)
        )
    return [record for per_trial in nested for record in per_trial]


def phase_bounds(budget: int, num_phases: int = NUM_PHASES) -> tuple[tuple[int, int], ...]:
    """Split steps 1..budget into consecutive quarters (1-based, inclusive).

    When the budget is not divisible by four, earlier phases take the extra
    steps.
    """
    if budget < num_phases:
        raise ValueError(f"budget must be >= {num_phases} to form phases")
    base, extra = divmod(budget, num_phases)
    sizes = [base + 1] * extra + [base] * (num_phases - extra)
    bounds = []
    start = 1
    for size in sizes:
        bounds.append((start, start + size - 1))
        start += size
    return tuple(bounds)


def aggregate(records: list[TrialRecord], num_classes: int) -> ExperimentReport:
    """Reduce trial records to curves, phase means, win ratios, and shares.

    Every strategy must cover the identical set of trial ids.  A trial's
    phase is won by the strategy with the smallest mean error over the
    phase's steps; exact ties make every tied strategy a winner, so win
    ratios across strategies may sum to more than one.
    """
    if not records:
        raise ValueError("no records to aggregate")
    strategies = list(dict.fromkeys(record.strategy for record in records))
    by_strategy: dict[str, list[TrialRecord]] = {name: [] for name in strategies}
    for record in records:
        by_strategy[record.strategy].append(record)
    trial_ids = sorted(record.trial_id for record in by_strategy[strategies[0]])
    for name, group in by_strategy.items():
        if sorted(r.trial_id for r in group) != trial_ids:
            raise ValueError(f"strategy {name!r} covers a different set of trials")
        group.sort(key=lambda r: r.trial_id)
    budgets = {record.errors.shape[0] for record in records}
    if len(budgets) != 1:
        raise ValueError("records disagree on budget")
    budget = budgets.pop()
    bounds = phase_bounds(budget)
    trials = len(trial_ids)

    curve_mean, curve_std, phase_mean, sampling = {}, {}, {}, {}
    per_phase_trial_means = {}
    for name in strategies:
        errors = np.vstack([r.errors for r in by_strategy[name]])  # (trials, budget)
        curve_mean[name] = errors.mean(axis=0)
        curve_std[name] = errors.std(axis=0)
        phase_trial = np.column_stack(
            [errors[:, lo - 1 : hi].mean(axis=1) for lo, hi in bounds]
        )  # (trials, phases)
        per_phase_trial_means[name] = phase_trial
        phase_mean[name] = phase_trial.mean(axis=0)
        choices = np.vstack([r.choices for r in by_strategy[name]])
        counts = np.apply_along_axis(
            lambda row: np.bincount(row, minlength=num_classes), 1, choices
        )
        sampling[name] = (counts / budget).mean(axis=0)

    stacked = np.stack(
        [per_phase_trial_means[name] for name in strategies]
    )  # (strategy, trials, phases)
    best = stacked.min(axis=0)
    win_ratio = {
        name: (per_phase_trial_means[name] == best).mean(axis=0)
        for name in strategies
    }

    return ExperimentReport(
        dataset=records[0].dataset,
        strategies=tuple(strategies),
        num_classes=num_classes,
        budget=budget,
        trials=trials,
        phase_bounds=bounds,
        curve_mean=curve_mean,
        curve_std=curve_std,
        phase_mean=phase_mean,
        win_ratio=win_ratio,
        sampling=sampling,
    )
