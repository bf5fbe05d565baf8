"""Repeated-split grid search: every candidate is scored by the mean validation
accuracy over seeded stratified splits, ties broken by enumeration order."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledSet, accuracy, stratified_split
from .mlp import MlpParams, train_mlp
from .svm import SvmParams, train_svm
from .trees import BoostParams, ForestParams, train_adaboost, train_random_forest

TRAINERS = {
    "svm": (SvmParams, train_svm),
    "mlp": (MlpParams, train_mlp),
    "forest": (ForestParams, train_random_forest),
    "boost": (BoostParams, train_adaboost),
}


@dataclass(frozen=True)
class GridCandidate:
    params: dict
    trial_accuracies: tuple[float, ...]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.trial_accuracies))


@dataclass(frozen=True)
class GridSearchReport:
    family: str
    trials: int
    seed: int
    candidates: tuple[GridCandidate, ...]
    winner_index: int
    protocol: str = "repeated seeded stratified train/validation splits"

    @property
    def winner(self) -> GridCandidate:
        return self.candidates[self.winner_index]

    def to_state(self) -> dict:
        return {
            "family": self.family,
            "trials": self.trials,
            "seed": self.seed,
            "protocol": self.protocol,
            "winner_index": self.winner_index,
            "candidates": [
                {
                    "params": c.params,
                    "trial_accuracies": list(c.trial_accuracies),
                    "mean_accuracy": c.mean_accuracy,
                }
                for c in self.candidates
            ],
        }


def train_family(family: str, train: LabeledSet, params: dict):
    if family not in TRAINERS:
        raise ValueError(f"unknown model family {family!r}; choose from {sorted(TRAINERS)}")
    param_cls, trainer = TRAINERS[family]
    return trainer(train, param_cls(**params))


def grid_search(
    train: LabeledSet,
    family: str,
    grid: list[dict],
    trials: int = 10,
    seed: int = 0,
    validation_fraction: float = 0.15,
) -> GridSearchReport:
    """Evaluate each parameter candidate over `trials` repeated 85/15 splits.

    Trial t uses split seed (seed + t) so the whole report is reproducible
    from the master seed. The winner has the highest mean accuracy; on exact
    ties the earliest candidate in the grid wins.
    """
    if not grid:
        raise ValueError("empty parameter grid")
    candidates = []
    for params in grid:
        scores = []
        for t in range(trials):
            fit, val = stratified_split(train, validation_fraction, seed + t)
            model = train_family(family, fit, params)
            scores.append(accuracy(val.labels, model.predict(val.features)))
        candidates.append(GridCandidate(dict(params), tuple(scores)))
    means = [c.mean_accuracy for c in candidates]
    winner = int(np.argmax(means))
    return GridSearchReport(family, trials, seed, tuple(candidates), winner)
