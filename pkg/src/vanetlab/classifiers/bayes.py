"""Gaussian naive Bayes on raw features.

Per class: empirical prior, per-feature mean and variance. Every
variance is widened by var_smoothing = 1e-9 times the largest feature
variance so constant features stay finite in log space. Score is the
normalized posterior of the malicious class.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .base import Classifier

VAR_SMOOTHING_FACTOR = 1e-9


class GaussianNaiveBayes(Classifier):
    kind = "GNB"
    threshold = 0.5

    def __init__(self):
        super().__init__()
        self.log_priors: Optional[np.ndarray] = None  # [class0, class1]
        self.means: Optional[np.ndarray] = None  # (2, n_features)
        self.variances: Optional[np.ndarray] = None  # (2, n_features)
        self.epsilon: float = 0.0

    def _fit(self, X: np.ndarray, y: np.ndarray) -> None:
        max_var = float(X.var(axis=0).max())
        self.epsilon = VAR_SMOOTHING_FACTOR * max_var if max_var > 0 else VAR_SMOOTHING_FACTOR
        n = X.shape[0]
        priors = []
        means = []
        variances = []
        for c in (0, 1):
            rows = X[y == c]
            priors.append(math.log(rows.shape[0] / n))
            means.append(rows.mean(axis=0))
            variances.append(rows.var(axis=0) + self.epsilon)
        self.log_priors = np.array(priors)
        self.means = np.stack(means)
        self.variances = np.stack(variances)

    def log_joint(self, X) -> np.ndarray:
        """(N, 2) log P(C=c) + sum_i log N(x_i | mean, var)."""
        X = self._check_ready(X)
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            diff = X - self.means[c]
            ll = -0.5 * (
                np.log(2.0 * math.pi * self.variances[c])
                + diff * diff / self.variances[c]
            ).sum(axis=1)
            out[:, c] = self.log_priors[c] + ll
        return out

    def _score(self, X: np.ndarray) -> np.ndarray:
        joint = self.log_joint(X)
        return np.exp(joint[:, 1] - np.logaddexp(joint[:, 0], joint[:, 1]))

    def to_state(self) -> dict:
        return {
            "kind": self.kind,
            "n_features": self.n_features_,
            "log_priors": list(map(float, self.log_priors)),
            "means": [list(map(float, row)) for row in self.means],
            "variances": [list(map(float, row)) for row in self.variances],
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_state(cls, state: dict) -> "GaussianNaiveBayes":
        model = cls()
        model.n_features_ = state["n_features"]
        model.log_priors = np.array(state["log_priors"])
        model.means = np.array(state["means"], dtype=np.float64)
        model.variances = np.array(state["variances"], dtype=np.float64)
        model.epsilon = state["epsilon"]
        return model
