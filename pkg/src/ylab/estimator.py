"""scikit-learn style wrappers around the adding procedure and the exact oracle.

``fit(X)`` takes an ``(n, 2)`` array of coordinates, or an ``(n, n)``
distance matrix with ``metric="precomputed"``, or an :class:`Instance`.
The tour is exposed as ``tour_`` and returned by ``fit_predict``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .heuristic import VARIANTS, run_adding
from .instance import Instance, instance_from_matrix, instance_from_points, tour_length
from .oracle import optimal, optimal_dp, optimal_permutation


def check_instance(X, metric: str = "euclidean") -> Instance:
    """Turn estimator input into an :class:`Instance`, validating on the way."""
    if isinstance(X, Instance):
        return X
    if metric == "euclidean":
        X = check_array(X, dtype=np.float64, ensure_min_samples=3, ensure_all_finite=True)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 coordinate columns, got {X.shape[1]}")
        return instance_from_points(X)
    if metric == "precomputed":
        X = check_array(X, dtype=np.float64, ensure_min_samples=3, ensure_all_finite=True)
        return instance_from_matrix(X)
    raise ValueError(f"metric must be 'euclidean' or 'precomputed', got {metric!r}")


class _TourEstimator(BaseEstimator):
    def _finish(self, inst, tour):
        self.instance_ = inst
        self.tour_ = np.asarray(tour, dtype=int)
        self.length_ = tour_length(inst, tour)
        self.n_features_in_ = inst.n if inst.coords is None else 2
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X, y).tour_

    def score(self, X=None, y=None):
        """Negative tour length of the fitted tour (higher is better)."""
        check_is_fitted(self, "tour_")
        return -self.length_


class InsertionTSP(_TourEstimator):
    """Yatsenko's adding procedure (``variant="maxmin"``) or its min-min variant.

    Attributes
    ----------
    tour_ : ndarray of int
        Visiting order, read cyclically.
    length_ : float
    trace_ : RunTrace
        Every tie set met and the index taken.
    """

    def __init__(self, variant="maxmin", eps=None, metric="euclidean"):
        self.variant = variant
        self.eps = eps
        self.metric = metric

    def fit(self, X, y=None):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        inst = check_instance(X, self.metric)
        self.trace_ = run_adding(inst, self.variant, self.eps)
        return self._finish(inst, self.trace_.final)


class ExactTSP(_TourEstimator):
    """Exact optimum by permutation scan, Held-Karp, or whichever is cheaper."""

    _methods = {"auto": optimal, "permutation": optimal_permutation, "dp": optimal_dp}

    def __init__(self, method="auto", metric="euclidean"):
        self.method = method
        self.metric = metric

    def fit(self, X, y=None):
        if self.method not in self._methods:
            raise ValueError(f"method must be one of {sorted(self._methods)}, got {self.method!r}")
        inst = check_instance(X, self.metric)
        self.result_ = self._methods[self.method](inst)
        return self._finish(inst, self.result_.tour)
