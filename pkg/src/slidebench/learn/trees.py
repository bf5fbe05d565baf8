"""Bagged Gini decision forests and multiclass (SAMME) boosting over stumps."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import LabeledSet


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 10
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("need at least one tree")


@dataclass(frozen=True)
class BoostParams:
    learning_rate: float = 0.5
    n_estimators: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("need at least one round")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def _weighted_gini(counts: np.ndarray, total: float) -> float:
    if total <= 0:
        return 0.0
    p = counts / total
    return 1.0 - float(np.sum(p * p))


def _best_split(
    x: np.ndarray,
    y_idx: np.ndarray,
    n_classes: int,
    weights: np.ndarray,
    feature_ids: np.ndarray,
) -> tuple[int, float, float] | None:
    """Best (feature, threshold) by weighted Gini gain; lowest feature id and
    threshold win ties. Split sends x <= threshold to the left."""
    total_counts = np.zeros(n_classes)
    np.add.at(total_counts, y_idx, weights)
    total_w = float(total_counts.sum())
    parent = _weighted_gini(total_counts, total_w)

    best: tuple[int, float, float] | None = None
    for f in feature_ids:
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ys = y_idx[order]
        ws = weights[order]
        left = np.zeros(n_classes)
        left_w = 0.0
        for i in range(xs.size - 1):
            left[ys[i]] += ws[i]
            left_w += ws[i]
            if xs[i] == xs[i + 1]:
                continue
            right = total_counts - left
            right_w = total_w - left_w
            impurity = (
                left_w * _weighted_gini(left, left_w)
                + right_w * _weighted_gini(right, right_w)
            ) / total_w
            gain = parent - impurity
            if gain > 1e-12 and (best is None or gain > best[2] + 1e-12):
                threshold = 0.5 * (xs[i] + xs[i + 1])
                best = (int(f), float(threshold), float(gain))
    return best


class _TreeBuilder:
    def __init__(self, n_classes: int, max_features: int | None, max_depth: int | None, rng):
        self.n_classes = n_classes
        self.max_features = max_features
        self.max_depth = max_depth
        self.rng = rng
        # flat arrays: feature < 0 marks a leaf whose prediction is threshold
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []

    def _leaf(self, y_idx: np.ndarray, weights: np.ndarray) -> int:
        counts = np.zeros(self.n_classes)
        np.add.at(counts, y_idx, weights)
        node = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(float(np.argmax(counts)))
        self.left.append(-1)
        self.right.append(-1)
        return node

    def build(self, x: np.ndarray, y_idx: np.ndarray, weights: np.ndarray, depth: int = 0) -> int:
        if np.all(y_idx == y_idx[0]) or (self.max_depth is not None and depth >= self.max_depth):
            return self._leaf(y_idx, weights)
        d = x.shape[1]
        if self.max_features is not None and self.max_features < d:
            feats = np.sort(self.rng.choice(d, size=self.max_features, replace=False))
        else:
            feats = np.arange(d)
        split = _best_split(x, y_idx, self.n_classes, weights, feats)
        if split is None:
            return self._leaf(y_idx, weights)
        f, thr, _ = split
        mask = x[:, f] <= thr
        node = len(self.feature)
        self.feature.append(f)
        self.threshold.append(thr)
        self.left.append(-1)
        self.right.append(-1)
        self.left[node] = self.build(x[mask], y_idx[mask], weights[mask], depth + 1)
        self.right[node] = self.build(x[~mask], y_idx[~mask], weights[~mask], depth + 1)
        return node


@dataclass
class _Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    root: int

    def predict_idx(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0], dtype=np.int64)
        for i in range(x.shape[0]):
            node = self.root
            while self.feature[node] >= 0:
                if x[i, self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = int(self.threshold[node])
        return out

    def to_state(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "root": self.root,
        }

    @classmethod
    def from_state(cls, s: dict) -> "_Tree":
        return cls(
            np.array(s["feature"], dtype=np.int64),
            np.array(s["threshold"], dtype=np.float64),
            np.array(s["left"], dtype=np.int64),
            np.array(s["right"], dtype=np.int64),
            int(s["root"]),
        )


def _grow_tree(
    x: np.ndarray,
    y_idx: np.ndarray,
    weights: np.ndarray,
    n_classes: int,
    max_features: int | None,
    max_depth: int | None,
    rng,
) -> _Tree:
    builder = _TreeBuilder(n_classes, max_features, max_depth, rng)
    root = builder.build(x, y_idx, weights)
    return _Tree(
        np.array(builder.feature, dtype=np.int64),
        np.array(builder.threshold, dtype=np.float64),
        np.array(builder.left, dtype=np.int64),
        np.array(builder.right, dtype=np.int64),
        root,
    )


class RandomForestModel:
    family = "forest"

    def __init__(self, params: ForestParams, classes: np.ndarray, trees: list[_Tree]):
        self.params = params
        self.classes = np.asarray(classes, dtype=np.int64)
        self.trees = trees

    def predict(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        votes = np.zeros((x.shape[0], self.classes.size), dtype=np.int64)
        for tree in self.trees:
            idx = tree.predict_idx(x)
            votes[np.arange(x.shape[0]), idx] += 1
        return self.classes[np.argmax(votes, axis=1)]

    def to_state(self) -> dict:
        p = self.params
        return {
            "params": {"n_estimators": p.n_estimators, "bootstrap": p.bootstrap, "seed": p.seed},
            "classes": self.classes.tolist(),
            "trees": [t.to_state() for t in self.trees],
        }

    @classmethod
    def from_state(cls, state: dict) -> "RandomForestModel":
        return cls(
            ForestParams(**state["params"]),
            np.array(state["classes"], dtype=np.int64),
            [_Tree.from_state(t) for t in state["trees"]],
        )


def train_random_forest(train: LabeledSet, params: ForestParams = ForestParams()) -> RandomForestModel:
    """Full-depth Gini trees over bootstrap resamples with ceil(sqrt(d))
    feature subsampling at every split; prediction is the majority vote."""
    classes = np.unique(train.labels)
    x = train.features
    y_idx = np.searchsorted(classes, train.labels)
    max_features = math.ceil(math.sqrt(x.shape[1]))
    rng = np.random.default_rng(params.seed)
    trees = []
    for _ in range(params.n_estimators):
        if params.bootstrap:
            sample = rng.integers(0, len(train), size=len(train))
        else:
            sample = np.arange(len(train))
        trees.append(
            _grow_tree(
                x[sample],
                y_idx[sample],
                np.ones(sample.size),
                classes.size,
                max_features,
                None,
                rng,
            )
        )
    return RandomForestModel(params, classes, trees)


class AdaBoostModel:
    family = "boost"

    def __init__(self, params: BoostParams, classes: np.ndarray, stumps: list[_Tree], stage_weights: list[float]):
        self.params = params
        self.classes = np.asarray(classes, dtype=np.int64)
        self.stumps = stumps
        self.stage_weights = stage_weights

    def predict(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        scores = np.zeros((x.shape[0], self.classes.size))
        for stump, w in zip(self.stumps, self.stage_weights):
            idx = stump.predict_idx(x)
            scores[np.arange(x.shape[0]), idx] += w
        return self.classes[np.argmax(scores, axis=1)]

    def staged_training_error(self, train: LabeledSet) -> list[float]:
        """Training error of the weighted vote after each boosting round."""
        x = train.features
        scores = np.zeros((x.shape[0], self.classes.size))
        errors = []
        for stump, w in zip(self.stumps, self.stage_weights):
            idx = stump.predict_idx(x)
            scores[np.arange(x.shape[0]), idx] += w
            pred = self.classes[np.argmax(scores, axis=1)]
            errors.append(float(np.mean(pred != train.labels)))
        return errors

    def to_state(self) -> dict:
        p = self.params
        return {
            "params": {
                "learning_rate": p.learning_rate,
                "n_estimators": p.n_estimators,
                "seed": p.seed,
            },
            "classes": self.classes.tolist(),
            "stumps": [t.to_state() for t in self.stumps],
            "stage_weights": self.stage_weights,
        }

    @classmethod
    def from_state(cls, state: dict) -> "AdaBoostModel":
        return cls(
            BoostParams(**state["params"]),
            np.array(state["classes"], dtype=np.int64),
            [_Tree.from_state(t) for t in state["stumps"]],
            [float(w) for w in state["stage_weights"]],
        )


def train_adaboost(train: LabeledSet, params: BoostParams = BoostParams()) -> AdaBoostModel:
    """Multiclass boosting over depth-1 stumps; each stage weight is scaled by
    the learning rate and stages stop once a stump cannot beat chance."""
    classes = np.unique(train.labels)
    x = train.features
    y_idx = np.searchsorted(classes, train.labels)
    k = classes.size
    n = len(train)
    rng = np.random.default_rng(params.seed)
    weights = np.full(n, 1.0 / n)
    stumps: list[_Tree] = []
    stage_weights: list[float] = []
    for _ in range(params.n_estimators):
        stump = _grow_tree(x, y_idx, weights, k, None, 1, rng)
        pred = stump.predict_idx(x)
        miss = pred != y_idx
        err = float(weights[miss].sum())
        if err >= 1.0 - 1.0 / k:
            break
        err = max(err, 1e-16)
        stage = params.learning_rate * (math.log((1.0 - err) / err) + math.log(k - 1.0))
        if stage <= 0:
            break
        stumps.append(stump)
        stage_weights.append(stage)
        weights = weights * np.exp(stage * miss)
        weights /= weights.sum()
        if err <= 1e-16:
            break
    if not stumps:
        # degenerate data: a single majority-vote leaf keeps the model usable
        stumps.append(_grow_tree(x, y_idx, weights, k, None, 0, rng))
        stage_weights.append(1.0)
    return AdaBoostModel(params, classes, stumps, stage_weights)
