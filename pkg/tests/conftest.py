"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest

from palacs.datasets import Dataset, minmax_normalize
from palacs.strategies import ClassSelectionStrategy, StrategyDecision


class ScriptedStrategy(ClassSelectionStrategy):
    """Deterministically replays a fixed class sequence (cycling)."""

    def __init__(self, sequence, label="scripted", random_state=None):
        self.sequence = sequence
        self.label = label
        self.random_state = random_state

    @property
    def name(self):
        return self.label

    def _setup(self):
        self._step = 0

    def select(self, X, y) -> StrategyDecision:
        self._ensure_started()
        choice = self.sequence[self._step % len(self.sequence)]
        self._step += 1
        return StrategyDecision(int(choice))


def make_symmetric_gaussians(per_class: int, seed: int, budget: int = 80) -> Dataset:
    """Four equal Gaussian clusters on square corners: no class is special."""
    rng = np.random.default_rng(seed)
    centers = np.array([[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]])
    X = np.concatenate([rng.normal(c, 0.6, size=(per_class, 2)) for c in centers])
    y = np.repeat(np.arange(4), per_class)
    return Dataset(
        name="symmetric4",
        X=minmax_normalize(X),
        y=y,
        num_classes=4,
        budget=budget,
    )


@pytest.fixture(scope="session")
def clusters_dataset():
    from palacs.datasets import generate_synthetic

    return generate_synthetic("3clusters", 200, seed=7)
