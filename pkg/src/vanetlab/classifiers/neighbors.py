"""k-nearest-neighbor voting over standardized features.

Distance ties resolve to the lower training-row index. A split vote
goes to the class with the smaller summed neighbor distance, then to
normal. Score is the malicious fraction of the neighborhood, so for odd
k the majority label coincides with score >= 0.5.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .base import Classifier, Standardizer


class KNearestNeighbors(Classifier):
    kind = "KNN"
    threshold = 0.5

    def __init__(self, k: int = 5):
        super().__init__()
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k
        self.standardizer = Standardizer()
        self.train_X: Optional[np.ndarray] = None
        self.train_y: Optional[np.ndarray] = None

    def _fit(self, X: np.ndarray, y: np.ndarray) -> None:
        self.train_X = self.standardizer.fit(X).transform(X)
        self.train_y = y.copy()

    def _neighbors(self, Xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(indices, distances) of the k nearest per query row."""
        k = min(self.k, self.train_X.shape[0])
        idx = np.empty((Xs.shape[0], k), dtype=np.int64)
        dist = np.empty((Xs.shape[0], k))
        for q in range(Xs.shape[0]):
            diff = self.train_X - Xs[q]
            d2 = (diff * diff).sum(axis=1)
            order = np.argsort(d2, kind="stable")[:k]
            idx[q] = order
            dist[q] = np.sqrt(d2[order])
        return idx, dist

    def _score(self, X: np.ndarray) -> np.ndarray:
        idx, _ = self._neighbors(self.standardizer.transform(X))
        return self.train_y[idx].mean(axis=1)

    def predict(self, X) -> np.ndarray:
        X = self._check_ready(X)
        idx, dist = self._neighbors(self.standardizer.transform(X))
        labels = self.train_y[idx]
        out = np.empty(X.shape[0], dtype=np.int64)
        k = labels.shape[1]
        for q in range(X.shape[0]):
            pos = int(labels[q].sum())
            neg = k - pos
            if pos != neg:
                out[q] = 1 if pos > neg else 0
            else:
                pos_dist = float(dist[q][labels[q] == 1].sum())
                neg_dist = float(dist[q][labels[q] == 0].sum())
                out[q] = 1 if pos_dist < neg_dist else 0
        return out

    def to_state(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.k,
            "n_features": self.n_features_,
            "standardizer": self.standardizer.to_state(),
            "train_X": [list(map(float, row)) for row in self.train_X],
            "train_y": list(map(int, self.train_y)),
        }

    @classmethod
    def from_state(cls, state: dict) -> "KNearestNeighbors":
        model = cls(k=state["k"])
        model.n_features_ = state["n_features"]
        model.standardizer = Standardizer.from_state(state["standardizer"])
        model.train_X = np.array(state["train_X"], dtype=np.float64).reshape(
            len(state["train_X"]), state["n_features"]
        )
        model.train_y = np.array(state["train_y"], dtype=np.int64)
        return model
