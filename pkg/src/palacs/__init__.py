"""Decision-theoretic active class selection.

A learner that may request new training instances class by class can ask:
which class's next instance will improve the classifier the most?  This
package provides a probabilistic answer (expected accuracy gain over local
label statistics, evaluated at pseudo instances sampled from per-class
kernel densities), three baseline strategies, kernel-based classification,
and a reproducible benchmark harness with a CLI.
"""

__version__ = "0.1.0"

from .datasets import (
    DEFAULT_BUDGETS,
    Dataset,
    TrialSplit,
    generate_synthetic,
    load_tabular,
    make_trial_split,
    minmax_normalize,
)
from .exceptions import ConfigError, DatasetError, InternalConsistencyError
from .gain import (
    dirichlet_cross_moment,
    enumerate_labeling_vectors,
    expected_performance,
    expected_performance_batch,
    monte_carlo_performance,
    monte_carlo_performance_curve,
    performance_gain,
    performance_gain_batch,
)
from .harness import (
    ExperimentReport,
    TrialRecord,
    aggregate,
    phase_bounds,
    run_experiment,
    run_trial,
    strategy_seed,
)
from .kernel import (
    ParzenWindowClassifier,
    gaussian_similarity,
    kernel_frequencies,
    sample_pseudo_instances,
)
from .strategies import (
    STRATEGIES,
    ClassSelectionStrategy,
    InverseStrategy,
    PalAcsStrategy,
    RandomStrategy,
    RedistrictingStrategy,
    StrategyDecision,
    largest_remainder_allocation,
    make_strategy,
    weighted_class_scores,
)

__all__ = [
    "__version__",
    "ConfigError",
    "DatasetError",
    "InternalConsistencyError",
    "DEFAULT_BUDGETS",
    "Dataset",
    "TrialSplit",
    "generate_synthetic",
    "load_tabular",
    "make_trial_split",
    "minmax_normalize",
    "dirichlet_cross_moment",
    "enumerate_labeling_vectors",
    "expected_performance",
    "expected_performance_batch",
    "monte_carlo_performance",
    "monte_carlo_performance_curve",
    "performance_gain",
    "performance_gain_batch",
    "ExperimentReport",
    "TrialRecord",
    "aggregate",
    "phase_bounds",
    "run_experiment",
    "run_trial",
    "strategy_seed",
    "ParzenWindowClassifier",
    "gaussian_similarity",
    "kernel_frequencies",
    "sample_pseudo_instances",
    "STRATEGIES",
    "ClassSelectionStrategy",
    "InverseStrategy",
    "PalAcsStrategy",
    "RandomStrategy",
    "RedistrictingStrategy",
    "StrategyDecision",
    "largest_remainder_allocation",
    "make_strategy",
    "weighted_class_scores",
]
