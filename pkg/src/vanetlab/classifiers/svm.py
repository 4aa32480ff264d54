"""Soft-margin SVM with an RBF kernel, trained by sequential minimal
optimization on the dual.

Labels map to {-1,+1} internally and features are standardized before
the kernel sees them. The optimizer keeps a full error cache; the
partner index j for a violating i is chosen to maximize |E_i - E_j|,
falling back to a deterministic rotation when that pair cannot move.
Training stops after max_passes consecutive sweeps without an update,
or gives up (converged=False) after max_passes * 50 sweeps total.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from .base import Classifier, Standardizer, labels_to_pm

log = logging.getLogger("vanetlab.svm")

SWEEP_CAP_FACTOR = 50
MIN_ALPHA_STEP = 1e-5


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """K[i, j] = exp(-gamma * ||A_i - B_j||^2)."""
    a2 = (A * A).sum(axis=1)[:, None]
    b2 = (B * B).sum(axis=1)[None, :]
    d2 = np.maximum(a2 + b2 - 2.0 * (A @ B.T), 0.0)
    return np.exp(-gamma * d2)


class SupportVectorMachine(Classifier):
    kind = "SVM"
    threshold = 0.0

    def __init__(
        self,
        C: float = 1.0,
        gamma: float = 0.25,
        tol: float = 1e-3,
        max_passes: int = 20,
    ):
        super().__init__()
        if C <= 0 or gamma <= 0 or tol <= 0 or max_passes < 1:
            raise ValueError("C, gamma, tol and max_passes must be positive")
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_passes = max_passes
        self.standardizer = Standardizer()
        self.sv_X: Optional[np.ndarray] = None
        self.sv_y: Optional[np.ndarray] = None
        self.sv_alpha: Optional[np.ndarray] = None
        self.b: float = 0.0
        self.converged: bool = False
        self.sweeps_run: int = 0

    def _try_pair(self, i: int, j: int, state: dict) -> bool:
        """One SMO pair update; True when the alphas moved."""
        if i == j:
            return False
        alpha, y, K, E = state["alpha"], state["y"], state["K"], state["E"]
        ai_old, aj_old = alpha[i], alpha[j]
        if y[i] != y[j]:
            L = max(0.0, aj_old - ai_old)
            H = min(self.C, self.C + aj_old - ai_old)
        else:
            L = max(0.0, ai_old + aj_old - self.C)
            H = min(self.C, ai_old + aj_old)
        if L >= H:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta >= 0.0:
            return False
        aj = aj_old - y[j] * (E[i] - E[j]) / eta
        aj = min(max(aj, L), H)
        if abs(aj - aj_old) < MIN_ALPHA_STEP:
            return False
        ai = ai_old + y[i] * y[j] * (aj_old - aj)
        alpha[i], alpha[j] = ai, aj

        d_i = y[i] * (ai - ai_old)
        d_j = y[j] * (aj - aj_old)
        b1 = self.b - E[i] - d_i * K[i, i] - d_j * K[i, j]
        b2 = self.b - E[j] - d_i * K[i, j] - d_j * K[j, j]
        if 0.0 < ai < self.C:
            self.b = b1
        elif 0.0 < aj < self.C:
            self.b = b2
        else:
            self.b = (b1 + b2) / 2.0

        state["u"] += d_i * K[i] + d_j * K[j]
        state["E"] = state["u"] + self.b - y
        return True

    def _fit(self, X: np.ndarray, y01: np.ndarray) -> None:
        Xs = self.standardizer.fit(X).transform(X)
        y = labels_to_pm(y01)
        n = X.shape[0]
        K = rbf_kernel(Xs, Xs, self.gamma)
        state = {
            "alpha": np.zeros(n),
            "y": y,
            "K": K,
            "u": np.zeros(n),
            "E": -y.astype(np.float64),
        }
        self.b = 0.0
        quiet_passes = 0
        sweeps = 0
        cap = self.max_passes * SWEEP_CAP_FACTOR
        while quiet_passes < self.max_passes and sweeps < cap:
            changed = 0
            for i in range(n):
                E, alpha = state["E"], state["alpha"]
                r = E[i] * y[i]
                if not (
                    (r < -self.tol and alpha[i] < self.C)
                    or (r > self.tol and alpha[i] > 0.0)
                ):
                    continue
                gaps = np.abs(E - E[i])
                gaps[i] = -1.0
                if self._try_pair(i, int(np.argmax(gaps)), state):
                    changed += 1
                    continue
                for step in range(1, n):
                    if self._try_pair(i, (i + step) % n, state):
                        changed += 1
                        break
            sweeps += 1
            quiet_passes = quiet_passes + 1 if changed == 0 else 0
        self.sweeps_run = sweeps
        self.converged = quiet_passes >= self.max_passes
        if not self.converged:
            log.warning("SMO hit the sweep cap (%d) before settling", cap)

        alpha = state["alpha"]
        keep = alpha > 1e-12
        self.sv_X = Xs[keep]
        self.sv_y = y[keep]
        self.sv_alpha = alpha[keep]

    def decision_function(self, X) -> np.ndarray:
        """Pre-sign margin of Eq. 3's sum over retained support vectors."""
        X = self._check_ready(X)
        Xs = self.standardizer.transform(X)
        if self.sv_X.shape[0] == 0:
            return np.full(X.shape[0], self.b)
        K = rbf_kernel(Xs, self.sv_X, self.gamma)
        return K @ (self.sv_alpha * self.sv_y) + self.b

    def _score(self, X: np.ndarray) -> np.ndarray:
        Xs = self.standardizer.transform(X)
        if self.sv_X.shape[0] == 0:
            return np.full(X.shape[0], self.b)
        K = rbf_kernel(Xs, self.sv_X, self.gamma)
        return K @ (self.sv_alpha * self.sv_y) + self.b

    def to_state(self) -> dict:
        return {
            "kind": self.kind,
            "C": self.C,
            "gamma": self.gamma,
            "tol": self.tol,
            "max_passes": self.max_passes,
            "n_features": self.n_features_,
            "standardizer": self.standardizer.to_state(),
            "sv_X": [list(map(float, row)) for row in self.sv_X],
            "sv_y": list(map(float, self.sv_y)),
            "sv_alpha": list(map(float, self.sv_alpha)),
            "b": self.b,
            "converged": self.converged,
        }

    @classmethod
    def from_state(cls, state: dict) -> "SupportVectorMachine":
        model = cls(
            C=state["C"],
            gamma=state["gamma"],
            tol=state["tol"],
            max_passes=state["max_passes"],
        )
        model.n_features_ = state["n_features"]
        model.standardizer = Standardizer.from_state(state["standardizer"])
        model.sv_X = np.array(state["sv_X"], dtype=np.float64).reshape(
            len(state["sv_X"]), state["n_features"]
        )
        model.sv_y = np.array(state["sv_y"], dtype=np.float64)
        model.sv_alpha = np.array(state["sv_alpha"], dtype=np.float64)
        model.b = state["b"]
        model.converged = state["converged"]
        return model
