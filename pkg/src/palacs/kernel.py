"""Gaussian similarity, per-class kernel frequencies, and the Parzen classifier.

The kernel frequency of a query point for class ``c`` is the sum of Gaussian
similarities exp(-||x - x'||^2 / (2 sigma^2)) over the labeled instances of
that class.  It generalizes a local label count to real values and is the
statistic consumed by :mod:`palacs.gain`.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

DEFAULT_BANDWIDTH = 0.05


def gaussian_similarity(a, b, bandwidth: float = DEFAULT_BANDWIDTH) -> float:
    """exp(-||a - b||^2 / (2 bandwidth^2)); 1.0 exactly when a == b.

    Underflows gracefully to 0.0 for distant points.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be > 0")
    sq = float(np.sum((a - b) ** 2))
    with np.errstate(under="ignore"):
        return float(np.exp(-sq / (2.0 * bandwidth**2)))


def kernel_frequencies(
    queries,
    X,
    y,
    num_classes: int,
    bandwidth: float = DEFAULT_BANDWIDTH,
) -> np.ndarray:
    """Per-class sums of Gaussian similarities from each query to the data.

    Parameters
    ----------
    queries : array-like of shape (n_queries, n_features)
        Points at which to evaluate the frequencies.
    X : array-like of shape (n_samples, n_features)
        Labeled instances; may be empty.
    y : array-like of shape (n_samples,)
        Integer class labels in [0, num_classes).
    num_classes : int
        Total number of classes; classes absent from `y` contribute zeros.
    bandwidth : float
        Kernel width sigma, > 0.

    Returns
    -------
    np.ndarray of shape (n_queries, num_classes)
        Non-negative; column c is zero wherever class c has no instances.
    """
    Q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if bandwidth <= 0:
        raise ValueError("bandwidth must be > 0")
    if num_classes < 1:
        raise ValueError("num_classes must be >= 1")
    freqs = np.zeros((Q.shape[0], num_classes), dtype=np.float64)
    if X.shape[0] == 0:
        return freqs
    if X.ndim != 2 or X.shape[1] != Q.shape[1]:
        raise ValueError(
            f"dimension mismatch: queries have {Q.shape[1]} features, data has "
            f"{X.shape[1] if X.ndim == 2 else 'unknown'}"
        )
    with np.errstate(under="ignore"):
        sims = np.exp(cdist(Q, X, "sqeuclidean") / (-2.0 * bandwidth**2))
    for c in range(num_classes):
        mask = y == c
        if mask.any():
            freqs[:, c] = sims[:, mask].sum(axis=1)
    return freqs


class ParzenWindowClassifier(BaseEstimator, ClassifierMixin):
    """Classify to the class with the largest kernel frequency.

    Ties resolve to the lowest class label, the same rule used by the
    gain computation.

    Parameters
    ----------
    bandwidth : float, default=0.05
        Gaussian kernel width.
    classes : array-like of int, optional
        Full set of class labels.  When given, labels absent from the
        training data stay valid argmax candidates (with frequency zero);
        when omitted, the labels observed in `y` are used.
    """

    def __init__(self, bandwidth: float = DEFAULT_BANDWIDTH, classes=None):
        self.bandwidth = bandwidth
        self.classes = classes

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if X.shape[0] == 0:
            raise ValueError("training set must be non-empty")
        if self.classes is not None:
            self.classes_ = np.asarray(self.classes)
            if not np.isin(y, self.classes_).all():
                raise ValueError("y contains labels outside `classes`")
        else:
            self.classes_ = np.unique(y)
        self._index = {label: i for i, label in enumerate(self.classes_)}
        self.X_ = np.asarray(X, dtype=np.float64)
        self.y_ = np.array([self._index[label] for label in y], dtype=np.int64)
        return self

    def kernel_frequencies(self, X) -> np.ndarray:
        """Per-class kernel frequencies of the queries, shape (n, n_classes)."""
        check_is_fitted(self, "X_")
        X = check_array(X)
        return kernel_frequencies(
            X, self.X_, self.y_, len(self.classes_), self.bandwidth
        )

    def predict(self, X):
        freqs = self.kernel_frequencies(X)
        return self.classes_[np.argmax(freqs, axis=1)]


def sample_pseudo_instances(
    X,
    y,
    num_classes: int,
    per_class: int,
    bandwidth: float = DEFAULT_BANDWIDTH,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> np.ndarray:
    """Draw points from each class's Gaussian kernel density estimate.

    Each draw picks a uniformly random instance of the target class and adds
    independent Gaussian noise with standard deviation `bandwidth` per
    dimension, i.e. exact sampling from the class KDE.  The same number of
    draws is taken from every class; samples may fall outside the data range
    and are intentionally not clipped.

    Parameters
    ----------
    X, y : arrays
        Labeled instances; every class in [0, num_classes) needs at least one.
    num_classes : int
        Number of classes.
    per_class : int
        Draws per class, >= 1.
    bandwidth : float
        KDE kernel width, shared with the frequency estimate.
    rng : np.random.Generator, optional
        Source of randomness; takes precedence over `seed`.
    seed : int, optional
        Convenience seed when no generator is supplied.

    Returns
    -------
    np.ndarray of shape (per_class * num_classes, n_features)
        Draws grouped by class: rows [c * per_class, (c+1) * per_class) come
        from class c's KDE.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    counts = np.bincount(y, minlength=num_classes) if y.size else np.zeros(num_classes)
    if np.any(counts[:num_classes] == 0):
        empty = int(np.argmin(counts[:num_classes]))
        raise ValueError(f"class {empty} has no instances to sample from")
    out = np.empty((per_class * num_classes, X.shape[1]), dtype=np.float64)
    for c in range(num_classes):
        members = X[y == c]
        picks = rng.integers(0, members.shape[0], size=per_class)
        noise = rng.normal(0.0, bandwidth, size=(per_class, X.shape[1]))
        out[c * per_class : (c + 1) * per_class] = members[picks] + noise
    return out
