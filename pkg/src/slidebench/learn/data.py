"""Labeled feature sets, stratified splitting, class weighting, and metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VALID_LABELS = (1, 2, 3, 4)


@dataclass(frozen=True)
class LabeledSet:
    """Uniform feature matrix with one category id per row.

    Category 5 never appears here: its population is too small to train on,
    so exports drop it before a set is built.
    """

    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64
    kind: str = "raw"

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        l = np.asarray(self.labels, dtype=np.int64)
        if f.ndim != 2 or l.ndim != 1 or f.shape[0] != l.shape[0]:
            raise ValueError(f"features {f.shape} and labels {l.shape} do not align")
        if f.shape[0] == 0:
            raise ValueError("empty labeled set")
        bad = set(np.unique(l).tolist()) - set(VALID_LABELS)
        if bad:
            raise ValueError(f"labels outside {VALID_LABELS}: {sorted(bad)}")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", l)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: np.ndarray) -> "LabeledSet":
        return LabeledSet(self.features[indices], self.labels[indices], self.kind)

    def class_counts(self) -> dict[int, int]:
        vals, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}


def stratified_split(
    data: LabeledSet, test_fraction: float, seed: int
) -> tuple[LabeledSet, LabeledSet]:
    """Per-class seeded shuffle; round(n * fraction) half up, at least 1, to test.

    The test count is additionally capped at n - 1 so no class ever vanishes
    from the training side. Classes with fewer than 2 samples are rejected.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    counts = data.class_counts()
    for label, n in counts.items():
        if n < 2:
            raise ValueError(f"class {label} has {n} sample(s); need at least 2")
    rng = np.random.default_rng(seed)
    test_idx: list[np.ndarray] = []
    train_idx: list[np.ndarray] = []
    for label in sorted(counts):
        idx = np.nonzero(data.labels == label)[0]
        shuffled = idx[rng.permutation(idx.size)]
        n_test = int(np.floor(idx.size * test_fraction + 0.5))
        n_test = min(max(n_test, 1), idx.size - 1)
        test_idx.append(shuffled[:n_test])
        train_idx.append(shuffled[n_test:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return data.subset(train), data.subset(test)


def class_weights(labels: np.ndarray) -> dict[int, float]:
    """Weights inversely proportional to class frequency: w_c = N / (K * n_c)."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("no labels")
    vals, counts = np.unique(labels, return_counts=True)
    total = labels.size
    k = vals.size
    return {int(v): float(total / (k * c)) for v, c in zip(vals, counts)}


def accuracy(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise ValueError("need equal-length non-empty label arrays")
    return float(np.mean(y_true == y_pred))


def weighted_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Per-class F1 averaged with true-class support weights.

    A class with zero precision + recall contributes 0 for its support.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise ValueError("need equal-length non-empty label arrays")
    total = 0.0
    for label in np.unique(y_true):
        support = int(np.sum(y_true == label))
        tp = int(np.sum((y_true == label) & (y_pred == label)))
        fp = int(np.sum((y_true != label) & (y_pred == label)))
        fn = support - tp
        denom = 2 * tp + fp + fn
        f1 = (2 * tp / denom) if denom > 0 else 0.0
        total += support * f1
    return total / y_true.size


class Standardizer:
    """Per-dimension zero-mean unit-variance scaling from training statistics.

    Constant dimensions keep scale 1 so they map to exactly zero.
    """

    def __init__(self, mean: np.ndarray, scale: np.ndarray):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.scale = np.asarray(scale, dtype=np.float64)

    @classmethod
    def fit(cls, features: np.ndarray) -> "Standardizer":
        mean = features.mean(axis=0)
        std = features.std(axis=0)
        scale = np.where(std > 0, std, 1.0)
        return cls(mean, scale)

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (np.asarray(features, dtype=np.float64) - self.mean) / self.scale

    def to_state(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_state(cls, state: dict) -> "Standardizer":
        return cls(np.array(state["mean"]), np.array(state["scale"]))
