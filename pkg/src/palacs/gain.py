"""Expected-accuracy gain from hypothetical label acquisitions.

Given a vector of per-class label statistics ``k`` (real-valued counts of
nearby labels, e.g. kernel frequencies), the local class posterior ``p`` is
modelled as Dirichlet(k + 1).  The expected local accuracy after adding ``m``
hypothetical labels is the expectation, over the posterior and over all ways
the ``m`` labels could distribute across classes, of the posterior mass of
the majority class.  All Dirichlet moments are available in closed form, so
the expectation reduces to a finite sum over integer compositions of ``m``.

The module provides both the closed-form computation and an independent
Monte Carlo estimator used to verify it.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .exceptions import InternalConsistencyError

# Negative gains larger than this magnitude indicate a real bug rather than
# floating-point cancellation.
_GAIN_TOLERANCE = 1e-12

DEFAULT_LOCAL_BUDGET = 3


def _as_label_stats(counts) -> np.ndarray:
    k = np.asarray(counts, dtype=np.float64)
    if k.ndim != 1 or k.shape[0] < 2:
        raise ValueError("label statistics must be a 1-D vector of length >= 2")
    if not np.all(np.isfinite(k)) or np.any(k < 0):
        raise ValueError("label statistics must be finite and non-negative")
    return k


def _as_stats_matrix(counts) -> np.ndarray:
    K = np.asarray(counts, dtype=np.float64)
    if K.ndim != 2 or K.shape[1] < 2:
        raise ValueError("expected a (n, num_classes) matrix with num_classes >= 2")
    if not np.all(np.isfinite(K)) or np.any(K < 0):
        raise ValueError("label statistics must be finite and non-negative")
    return K


@lru_cache(maxsize=None)
def _compositions(num_classes: int, total: int) -> tuple[tuple[int, ...], ...]:
    """All ways to split `total` into `num_classes` non-negative parts.

    Ordered lexicographically descending, e.g. (2,0,0) before (1,1,0).
    """
    if num_classes == 1:
        return ((total,),)
    out = []
    for first in range(total, -1, -1):
        for rest in _compositions(num_classes - 1, total - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _composition_table(num_classes: int, total: int) -> tuple[np.ndarray, np.ndarray]:
    """Composition matrix plus log multinomial coefficients for each row."""
    comps = np.array(_compositions(num_classes, total), dtype=np.int64)
    comps = comps.reshape(-1, num_classes)
    log_coefs = np.array(
        [
            math.lgamma(total + 1) - sum(math.lgamma(c + 1) for c in row)
            for row in comps
        ],
        dtype=np.float64,
    )
    comps.setflags(write=False)
    log_coefs.setflags(write=False)
    return comps, log_coefs


def enumerate_labeling_vectors(num_classes: int, total: int) -> np.ndarray:
    """Enumerate every allocation of `total` future labels to classes.

    Parameters
    ----------
    num_classes : int
        Number of classes, at least 2.
    total : int
        Number of labels to distribute, at least 0.

    Returns
    -------
    np.ndarray of shape (binom(total + num_classes - 1, num_classes - 1), num_classes)
        Integer rows summing to `total`, in lexicographically descending
        order.
    """
    if num_classes < 2:
        raise ValueError("num_classes must be >= 2")
    if total < 0:
        raise ValueError("total must be >= 0")
    comps, _ = _composition_table(int(num_classes), int(total))
    return comps.copy()


def dirichlet_cross_moment(beta, exponents, winner: int) -> float:
    """E[(prod_i p_i^{l_i}) * p_winner] for p ~ Dirichlet(beta).

    Computed in log space: the Gamma-ratio product
    prod_i Gamma(beta_i + a_i) / Gamma(beta_i) * Gamma(S) / Gamma(S + sum(a)),
    with a = exponents plus one extra count on `winner` and S = sum(beta),
    would overflow if evaluated directly for large beta.

    Parameters
    ----------
    beta : array-like
        Dirichlet parameters, all > 0.
    exponents : array-like of int
        Non-negative integer exponents, one per class.
    winner : int
        Index of the class whose probability enters linearly.

    Returns
    -------
    float in (0, 1].
    """
    b = np.asarray(beta, dtype=np.float64)
    if b.ndim != 1 or np.any(b <= 0) or not np.all(np.isfinite(b)):
        raise ValueError("beta must be a 1-D vector of positive reals")
    a = np.asarray(exponents, dtype=np.float64)
    if a.shape != b.shape or np.any(a < 0):
        raise ValueError("exponents must be non-negative and match beta's length")
    if not 0 <= winner < b.shape[0]:
        raise ValueError("winner index out of range")
    a = a.copy()
    a[winner] += 1.0
    log_term = (
        np.sum(gammaln(b + a) - gammaln(b))
        + gammaln(b.sum())
        - gammaln(b.sum() + a.sum())
    )
    return float(np.exp(log_term))


def expected_performance_batch(counts, num_added: int) -> np.ndarray:
    """Closed-form expected local accuracy for several statistics vectors.

    Row-wise version of :func:`expected_performance`; `counts` has one label
    statistics vector per row.
    """
    K = _as_stats_matrix(counts)
    if num_added < 0:
        raise ValueError("num_added must be >= 0")
    n, num_classes = K.shape
    beta = K + 1.0
    log_gamma_beta = gammaln(beta)
    total = beta.sum(axis=1)
    # Gamma(S) / Gamma(S + m + 1) is shared by every composition.
    log_norm = gammaln(total) - gammaln(total + num_added + 1.0)

    comps, log_coefs = _composition_table(num_classes, int(num_added))
    result = np.zeros(n, dtype=np.float64)
    for row, log_coef in zip(comps, log_coefs):
        shifted = K + row
        winner = np.argmax(shifted, axis=1)  # ties resolve to the lowest index
        beta_l = beta + row
        winner_val = np.take_along_axis(beta_l, winner[:, None], axis=1)[:, 0]
        # The winner's extra unit exponent contributes
        # gammaln(beta_w + l_w + 1) - gammaln(beta_w + l_w) = log(beta_w + l_w).
        log_term = (
            np.sum(gammaln(beta_l) - log_gamma_beta, axis=1)
            + np.log(winner_val)
            + log_norm
            + log_coef
        )
        result += np.exp(log_term)
    return result


def expected_performance(counts, num_added: int) -> float:
    """Expected local accuracy after `num_added` hypothetical labels.

    The posterior over the local class distribution is Dirichlet(counts + 1);
    the added labels follow the multinomial induced by the drawn posterior,
    and the realized accuracy is the posterior mass of the class that holds
    the majority after the addition (ties to the lowest class index).

    Parameters
    ----------
    counts : array-like
        Per-class label statistics, non-negative reals, length >= 2.
    num_added : int
        Number of hypothetical labels, >= 0.

    Returns
    -------
    float in (0, 1).
    """
    k = _as_label_stats(counts)
    return float(expected_performance_batch(k[None, :], num_added)[0])


def performance_gain_batch(counts, max_added: int = DEFAULT_LOCAL_BUDGET) -> np.ndarray:
    """Row-wise version of :func:`performance_gain`."""
    K = _as_stats_matrix(counts)
    if max_added < 1:
        raise ValueError("max_added must be >= 1")
    base = expected_performance_batch(K, 0)
    best = np.full(K.shape[0], -np.inf)
    for m in range(1, max_added + 1):
        gain = (expected_performance_batch(K, m) - base) / m
        np.maximum(best, gain, out=best)
    if np.any(best < -_GAIN_TOLERANCE):
        raise InternalConsistencyError(
            f"expected-accuracy gain fell below -{_GAIN_TOLERANCE}: {best.min()}"
        )
    return np.maximum(best, 0.0)


def performance_gain(counts, max_added: int = DEFAULT_LOCAL_BUDGET) -> float:
    """Best average per-label improvement in expected local accuracy.

    Maximizes (expected_performance(counts, m) - expected_performance(counts, 0)) / m
    over m in {1, ..., max_added}.  The result is non-negative; tiny negative
    values from floating-point cancellation are clamped to zero, larger ones
    raise :class:`InternalConsistencyError`.
    """
    k = _as_label_stats(counts)
    return float(performance_gain_batch(k[None, :], max_added)[0])


def monte_carlo_performance_curve(
    counts,
    added_values,
    samples: int,
    seed: int,
    block_size: int = 250_000,
) -> dict[int, float]:
    """Monte Carlo estimates of expected performance for several `num_added`.

    Shares one set of posterior draws across all requested values, which is
    what makes the full verification sweep affordable.  Independent of the
    closed-form code path: for each draw p ~ Dirichlet(counts + 1) the label
    allocations are enumerated with their multinomial probabilities and the
    majority-class mass is averaged.
    """
    k = _as_label_stats(counts)
    added = [int(m) for m in added_values]
    if any(m < 0 for m in added):
        raise ValueError("num_added values must be >= 0")
    if samples < 100_000:
        raise ValueError("samples must be >= 100000 for a meaningful estimate")
    num_classes = k.shape[0]
    alpha = k + 1.0

    plans = {}
    for m in added:
        rows = _compositions(num_classes, m)
        plans[m] = [
            (
                row,
                math.exp(
                    math.lgamma(m + 1) - sum(math.lgamma(c + 1) for c in row)
                ),
                int(np.argmax(k + np.array(row))),
            )
            for row in rows
        ]

    rng = np.random.default_rng(seed)
    totals = {m: 0.0 for m in added}
    drawn = 0
    while drawn < samples:
        b = min(block_size, samples - drawn)
        p = rng.dirichlet(alpha, size=b)
        for m in added:
            acc = np.zeros(b, dtype=np.float64)
            for row, coef, winner in plans[m]:
                term = p[:, winner].copy()
                for i, exponent in enumerate(row):
                    if exponent:
                        term *= p[:, i] ** exponent
                acc += coef * term
            totals[m] += float(acc.sum())
        drawn += b
    return {m: totals[m] / samples for m in added}


def monte_carlo_performance(counts, num_added: int, samples: int, seed: int) -> float:
    """Monte Carlo estimate of :func:`expected_performance`.

    Deterministic given `seed`.  Requires at least 1e5 draws.
    """
    return monte_carlo_performance_curve(counts, (num_added,), samples, seed)[
        int(num_added)
    ]
