"""Fixed category scheme for expert labeling, with reference population counts."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ClassInfo:
    id: int
    name: str
    reference_count: int


CLASS_TABLE: tuple[ClassInfo, ...] = (
    ClassInfo(1, "Corylus avellana (well-developed pollen grains)", 1850),
    ClassInfo(2, "Corylus avellana (anomalous pollen grains)", 903),
    ClassInfo(3, "Alnus (well-developed pollen grains)", 9558),
    ClassInfo(4, "Debris", 999),
    ClassInfo(5, "Cupressaceae", 43),
)

CLASS_IDS = tuple(c.id for c in CLASS_TABLE)
EXCLUDED_CLASS_ID = 5  # population far too small to train on
