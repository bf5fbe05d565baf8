"""Soft-margin kernel SVMs trained by sequential minimal optimization.

Multiclass is one-vs-rest: one binary machine per class, prediction by
argmax decision value with ties going to the lowest class id. Features are
standardized with training statistics before any kernel evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledSet, Standardizer, class_weights


@dataclass(frozen=True)
class SvmParams:
    kernel: str = "rbf"  # "linear" or "rbf"
    c: float = 1.0
    gamma: float = 0.1  # rbf only
    class_weighted: bool = False
    tolerance: float = 1e-3
    max_passes: int = 1000

    def __post_init__(self):
        if self.kernel not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.c <= 0:
            raise ValueError("C must be positive")
        if self.kernel == "rbf" and self.gamma <= 0:
            raise ValueError("gamma must be positive for the rbf kernel")
        if self.tolerance <= 0 or self.max_passes < 1:
            raise ValueError("bad solver controls")


def kernel_matrix(a: np.ndarray, b: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return a @ b.T
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def solve_smo(
    k: np.ndarray,
    y: np.ndarray,
    c_vec: np.ndarray,
    tolerance: float = 1e-3,
    max_passes: int = 1000,
) -> tuple[np.ndarray, float]:
    """Pairwise coordinate ascent on the SVM dual with per-sample box limits.

    Each step optimizes the maximal violating pair exactly, so the dual
    objective rises monotonically and termination directly bounds every
    first-order violation by the tolerance. Returns (alpha, b) for the
    decision function f(x) = sum_i alpha_i y_i k(x_i, x) + b.

    The step budget is max_passes * len(y) pair updates.
    """
    n = y.size
    alpha = np.zeros(n)
    f = np.zeros(n)  # kernel expansion without the bias
    positive = y > 0

    b_low = 1.0
    b_up = -1.0
    for _ in range(max_passes * n):
        beta = y - f
        # pairs are drawn from the samples whose multiplier can still move
        # toward (low) or against (up) the constraint direction
        low = (positive & (alpha < c_vec)) | (~positive & (alpha > 0))
        up = (positive & (alpha > 0)) | (~positive & (alpha < c_vec))
        low_idx = np.nonzero(low)[0]
        up_idx = np.nonzero(up)[0]
        i = int(low_idx[np.argmax(beta[low_idx])])
        j = int(up_idx[np.argmin(beta[up_idx])])
        b_low = float(beta[i])
        b_up = float(beta[j])
        if b_low - b_up <= 2.0 * tolerance:
            break

        # largest feasible step along (alpha_i += y_i t, alpha_j -= y_j t)
        room_i = c_vec[i] - alpha[i] if positive[i] else alpha[i]
        room_j = alpha[j] if positive[j] else c_vec[j] - alpha[j]
        t = min(room_i, room_j)
        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if eta > 0:
            t = min(t, (b_low - b_up) / eta)
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        f += t * (k[i] - k[j])

    return alpha, 0.5 * (b_low + b_up)


def dual_objective(alpha: np.ndarray, y: np.ndarray, k: np.ndarray) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ k @ ay)


def kkt_violation(
    alpha: np.ndarray, b: float, y: np.ndarray, k: np.ndarray, c_vec: np.ndarray
) -> float:
    """Largest violation of the first-order optimality conditions."""
    f = k @ (alpha * y) + b
    margins = y * f
    worst = 0.0
    for i in range(y.size):
        if alpha[i] <= 0:
            worst = max(worst, 1.0 - margins[i])
        elif alpha[i] >= c_vec[i]:
            worst = max(worst, margins[i] - 1.0)
        else:
            worst = max(worst, abs(margins[i] - 1.0))
    return worst


class SvmModel:
    family = "svm"

    def __init__(
        self,
        params: SvmParams,
        classes: np.ndarray,
        scaler: Standardizer,
        machines: list[dict],
    ):
        self.params = params
        self.classes = np.asarray(classes, dtype=np.int64)
        self.scaler = scaler
        self.machines = machines  # per class: support vectors, coefs, bias

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        x = self.scaler.transform(features)
        out = np.empty((x.shape[0], len(self.machines)))
        for j, m in enumerate(self.machines):
            km = kernel_matrix(x, m["support"], self.params.kernel, self.params.gamma)
            out[:, j] = km @ m["coef"] + m["bias"]
        return out

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.decision_values(features), axis=1)]

    def to_state(self) -> dict:
        return {
            "params": {
                "kernel": self.params.kernel,
                "c": self.params.c,
                "gamma": self.params.gamma,
                "class_weighted": self.params.class_weighted,
                "tolerance": self.params.tolerance,
                "max_passes": self.params.max_passes,
            },
            "classes": self.classes.tolist(),
            "scaler": self.scaler.to_state(),
            "machines": [
                {
                    "support": m["support"].tolist(),
                    "coef": m["coef"].tolist(),
                    "bias": m["bias"],
                }
                for m in self.machines
            ],
        }

    @classmethod
    def from_state(cls, state: dict) -> "SvmModel":
        machines = [
            {
                "support": np.array(m["support"], dtype=np.float64),
                "coef": np.array(m["coef"], dtype=np.float64),
                "bias": float(m["bias"]),
            }
            for m in state["machines"]
        ]
        return cls(
            SvmParams(**state["params"]),
            np.array(state["classes"], dtype=np.int64),
            Standardizer.from_state(state["scaler"]),
            machines,
        )


def train_svm(train: LabeledSet, params: SvmParams = SvmParams()) -> SvmModel:
    """One-vs-rest SMO training with optional inverse-frequency class weighting."""
    if not np.all(np.isfinite(train.features)):
        raise ValueError("features hold non-finite values")
    classes = np.unique(train.labels)
    if classes.size < 2:
        raise ValueError("need at least 2 distinct labels to train")
    scaler = Standardizer.fit(train.features)
    x = scaler.transform(train.features)

    weights = class_weights(train.labels) if params.class_weighted else None
    c_vec = np.full(len(train), params.c)
    if weights is not None:
        c_vec = np.array([params.c * weights[int(l)] for l in train.labels])

    k = kernel_matrix(x, x, params.kernel, params.gamma)
    machines = []
    for cls_id in classes:
        y = np.where(train.labels == cls_id, 1.0, -1.0)
        alpha, b = solve_smo(k, y, c_vec, params.tolerance, params.max_passes)
        sv = alpha > 1e-12
        machines.append(
            {
                "support": x[sv].copy(),
                "coef": (alpha[sv] * y[sv]).copy(),
                "bias": float(b),
            }
        )
    return SvmModel(params, classes, scaler, machines)
