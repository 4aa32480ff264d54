"""The six detection models behind one fit/predict/score contract.

Larger score always means more likely malicious. GB, GNB and LR score
probabilities against threshold 0.5; SVM scores the signed margin
against 0; RF and KNN score vote fractions. Models persist to JSON and
a reloaded model reproduces its predictions exactly.
"""

from __future__ import annotations

import json

from ..errors import SchemaError
from .base import Classifier, Standardizer, as_arrays, sigmoid
from .bayes import GaussianNaiveBayes
from .boosting import GradientBoosting, log_loss
from .forest import RandomForest
from .linear import LogisticRegression, loss_and_grad
from .neighbors import KNearestNeighbors
from .svm import SupportVectorMachine, rbf_kernel

KINDS = ("GB", "RF", "SVM", "KNN", "GNB", "LR")

_REGISTRY: dict[str, type[Classifier]] = {
    "GB": GradientBoosting,
    "RF": RandomForest,
    "SVM": SupportVectorMachine,
    "KNN": KNearestNeighbors,
    "GNB": GaussianNaiveBayes,
    "LR": LogisticRegression,
}


def make(kind: str, **params) -> Classifier:
    """A fresh untrained model of the given kind with default parameters."""
    if kind not in _REGISTRY:
        raise ValueError(f"unknown classifier kind {kind!r}; expected one of {KINDS}")
    return _REGISTRY[kind](**params)


def save_model(model: Classifier, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model.to_state(), fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> Classifier:
    with open(path, "r", encoding="utf-8") as fh:
        state = json.load(fh)
    kind = state.get("kind")
    if kind not in _REGISTRY:
        raise SchemaError(f"{path}: unknown model kind {kind!r}")
    return _REGISTRY[kind].from_state(state)


__all__ = [
    "KINDS",
    "Classifier",
    "Standardizer",
    "GaussianNaiveBayes",
    "GradientBoosting",
    "KNearestNeighbors",
    "LogisticRegression",
    "RandomForest",
    "SupportVectorMachine",
    "as_arrays",
    "load_model",
    "log_loss",
    "loss_and_grad",
    "make",
    "rbf_kernel",
    "save_model",
    "sigmoid",
]
