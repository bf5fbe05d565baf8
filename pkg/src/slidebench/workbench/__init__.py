"""Dataset I/O, manifest persistence, synthetic scenes, and the label service."""

from .classes import CLASS_TABLE, ClassInfo
from .manifest import ManifestError, ManifestRecord, apply_label, read_manifest, write_manifest
from .synthetic import (
    GroundTruthObject,
    InfeasiblePackingError,
    SyntheticSpec,
    generate_synthetic_scene,
)

__all__ = [
    "CLASS_TABLE",
    "ClassInfo",
    "ManifestError",
    "ManifestRecord",
    "apply_label",
    "read_manifest",
    "write_manifest",
    "GroundTruthObject",
    "InfeasiblePackingError",
    "SyntheticSpec",
    "generate_synthetic_scene",
]
