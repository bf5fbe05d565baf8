"""Single-hidden-layer perceptron: ReLU hidden activation, softmax output,
cross-entropy loss with an L2 weight penalty, plain mini-batch gradient
descent. Fully deterministic given the seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledSet, Standardizer


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; carries the epoch and last finite loss."""

    def __init__(self, epoch: int, loss: float, last_finite: float):
        super().__init__(
            f"loss is {loss} at epoch {epoch} (last finite value {last_finite:.6g}); "
            "lower the learning rate or raise alpha"
        )
        self.epoch = epoch
        self.last_finite = last_finite


@dataclass(frozen=True)
class MlpParams:
    hidden_units: int = 100
    alpha: float = 0.1  # L2 penalty on weights
    epochs: int = 300
    learning_rate: float = 0.01
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ValueError("need at least one hidden unit")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0 or self.alpha < 0:
            raise ValueError("bad learning_rate or alpha")


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(
    w1: np.ndarray,
    b1: np.ndarray,
    w2: np.ndarray,
    b2: np.ndarray,
    x: np.ndarray,
    onehot: np.ndarray,
    alpha: float,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Mean cross-entropy plus 0.5 * alpha * ||W||^2 / batch, with exact gradients."""
    n = x.shape[0]
    z1 = x @ w1 + b1
    a1 = np.maximum(z1, 0.0)
    logits = a1 @ w2 + b2
    probs = _softmax(logits)
    ce = -np.mean(np.log(np.maximum(probs[np.arange(n), onehot.argmax(axis=1)], 1e-300)))
    penalty = 0.5 * alpha * (float(np.sum(w1 * w1)) + float(np.sum(w2 * w2))) / n
    loss = ce + penalty

    dlogits = (probs - onehot) / n
    dw2 = a1.T @ dlogits + alpha * w2 / n
    db2 = dlogits.sum(axis=0)
    da1 = dlogits @ w2.T
    dz1 = da1 * (z1 > 0)
    dw1 = x.T @ dz1 + alpha * w1 / n
    db1 = dz1.sum(axis=0)
    return loss, dw1, db1, dw2, db2


class MlpModel:
    family = "mlp"

    def __init__(
        self,
        params: MlpParams,
        classes: np.ndarray,
        scaler: Standardizer,
        w1: np.ndarray,
        b1: np.ndarray,
        w2: np.ndarray,
        b2: np.ndarray,
    ):
        self.params = params
        self.classes = np.asarray(classes, dtype=np.int64)
        self.scaler = scaler
        self.w1, self.b1, self.w2, self.b2 = w1, b1, w2, b2

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        x = self.scaler.transform(features)
        a1 = np.maximum(x @ self.w1 + self.b1, 0.0)
        return _softmax(a1 @ self.w2 + self.b2)

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.predict_proba(features), axis=1)]

    def to_state(self) -> dict:
        p = self.params
        return {
            "params": {
                "hidden_units": p.hidden_units,
                "alpha": p.alpha,
                "epochs": p.epochs,
                "learning_rate": p.learning_rate,
                "batch_size": p.batch_size,
                "seed": p.seed,
            },
            "classes": self.classes.tolist(),
            "scaler": self.scaler.to_state(),
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "MlpModel":
        return cls(
            MlpParams(**state["params"]),
            np.array(state["classes"], dtype=np.int64),
            Standardizer.from_state(state["scaler"]),
            np.array(state["w1"], dtype=np.float64),
            np.array(state["b1"], dtype=np.float64),
            np.array(state["w2"], dtype=np.float64),
            np.array(state["b2"], dtype=np.float64),
        )


def init_weights(
    n_in: int, hidden: int, n_out: int, seed: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    w1 = rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_in, hidden))
    w2 = rng.normal(0.0, np.sqrt(2.0 / hidden), size=(hidden, n_out))
    return w1, np.zeros(hidden), w2, np.zeros(n_out)


def train_mlp(train: LabeledSet, params: MlpParams = MlpParams()) -> MlpModel:
    classes = np.unique(train.labels)
    if classes.size < 2:
        raise ValueError("need at least 2 distinct labels to train")
    scaler = Standardizer.fit(train.features)
    x = scaler.transform(train.features)
    onehot = (train.labels[:, None] == classes[None, :]).astype(np.float64)

    w1, b1, w2, b2 = init_weights(x.shape[1], params.hidden_units, classes.size, params.seed)
    rng = np.random.default_rng(params.seed + 1)
    n = x.shape[0]
    last_finite = float("inf")
    for epoch in range(params.epochs):
        order = rng.permutation(n)
        for start in range(0, n, params.batch_size):
            batch = order[start : start + params.batch_size]
            loss, dw1, db1, dw2, db2 = loss_and_grads(
                w1, b1, w2, b2, x[batch], onehot[batch], params.alpha
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, loss, last_finite)
            last_finite = loss
            lr = params.learning_rate
            w1 -= lr * dw1
            b1 -= lr * db1
            w2 -= lr * dw2
            b2 -= lr * db2
    return MlpModel(params, classes, scaler, w1, b1, w2, b2)
