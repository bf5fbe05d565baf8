"""Versioned JSON container for trained models.

Floats serialize through repr so a reloaded model reproduces its predictions
bit for bit.
"""
from __future__ import annotations

import json
from pathlib import Path

FORMAT = "slidebench-model"
VERSION = 1


def save_model(model, path: str | Path) -> None:
    payload = {"format": FORMAT, "version": VERSION, "family": model.family, "state": model.to_state()}
    Path(path).write_text(json.dumps(payload))


def load_model(path: str | Path):
    from .mlp import MlpModel
    from .svm import SvmModel
    from .trees import AdaBoostModel, RandomForestModel

    registry = {
        "svm": SvmModel,
        "mlp": MlpModel,
        "forest": RandomForestModel,
        "boost": AdaBoostModel,
    }
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != FORMAT:
        raise ValueError(f"{path} is not a {FORMAT} file")
    if payload.get("version") != VERSION:
        raise ValueError(f"unsupported model version {payload.get('version')}")
    family = payload.get("family")
    if family not in registry:
        raise ValueError(f"unknown model family {family!r}")
    return registry[family].from_state(payload["state"])
