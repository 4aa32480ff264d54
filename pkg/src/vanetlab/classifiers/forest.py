"""Random forest: bagged gini trees with per-split feature subsampling.

The predicted label is the majority vote over trees; score is the
fraction of trees voting malicious. With an even tree count an exact
50/50 vote resolves to normal, encoded by the decision threshold
(n_trees // 2 + 1) / n_trees.
"""

from __future__ import annotations

import numpy as np

from ..engine import substream
from .base import Classifier
from .tree import grow_tree, tree_apply

_RF_TREE_KEY = 211


class RandomForest(Classifier):
    kind = "RF"

    def __init__(
        self,
        n_trees: int = 100,
        max_features: int = 2,
        bootstrap: bool = True,
        seed: int = 0,
    ):
        super().__init__()
        if n_trees < 1 or max_features < 1:
            raise ValueError("n_trees and max_features must be positive")
        self.n_trees = n_trees
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed
        self.threshold = (n_trees // 2 + 1) / n_trees
        self.trees: list[dict] = []

    def _fit(self, X: np.ndarray, y: np.ndarray) -> None:
        n = X.shape[0]
        self.trees = []
        for i in range(self.n_trees):
            rng = substream(self.seed, _RF_TREE_KEY, i)
            if self.bootstrap:
                rows = np.array([rng.randrange(n) for _ in range(n)])
                Xb, yb = X[rows], y[rows]
            else:
                Xb, yb = X, y
            tree = grow_tree(
                Xb,
                yb,
                criterion="gini",
                max_depth=None,
                max_features=min(self.max_features, X.shape[1]),
                rng=rng,
            )
            self.trees.append(tree)

    def tree_votes(self, X) -> np.ndarray:
        """Per-tree label matrix (n_trees x N), for vote auditing."""
        X = self._check_ready(X)
        return np.stack([tree_apply(t, X) for t in self.trees])

    def _score(self, X: np.ndarray) -> np.ndarray:
        votes = np.stack([tree_apply(t, X) for t in self.trees])
        return votes.sum(axis=0) / self.n_trees

    def to_state(self) -> dict:
        return {
            "kind": self.kind,
            "n_trees": self.n_trees,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "n_features": self.n_features_,
            "trees": self.trees,
        }

    @classmethod
    def from_state(cls, state: dict) -> "RandomForest":
        model = cls(
            n_trees=state["n_trees"],
            max_features=state["max_features"],
            bootstrap=state["bootstrap"],
            seed=state["seed"],
        )
        model.n_features_ = state["n_features"]
        model.trees = state["trees"]
        return model
