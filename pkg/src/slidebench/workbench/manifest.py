"""Line-delimited manifest of segmented objects and their expert labels.

One JSON object per line so manifests diff cleanly and stream. Unknown
fields survive a read/write round trip. Writes go through a temp file and
an atomic rename, so a crash can never corrupt the previous manifest.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .classes import CLASS_IDS

UNLABELED = "unlabeled"
DISCARDED = "discarded"


class ManifestError(ValueError):
    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


@dataclass
class ManifestRecord:
    object_id: str
    source_image: str
    bbox: tuple[int, int, int, int]
    centroid: tuple[float, float]
    crop_path: str
    mask_path: str
    green_path: str
    label: int | str = UNLABELED
    labeled_by: str | None = None
    labeled_at: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_label(self.label)
        self.bbox = tuple(int(v) for v in self.bbox)
        self.centroid = tuple(float(v) for v in self.centroid)

    @property
    def status(self) -> str:
        if self.label == UNLABELED:
            return UNLABELED
        if self.label == DISCARDED:
            return DISCARDED
        return "labeled"

    def to_json(self) -> dict:
        d = {
            "object_id": self.object_id,
            "source_image": self.source_image,
            "bbox": list(self.bbox),
            "centroid": list(self.centroid),
            "crop_path": self.crop_path,
            "mask_path": self.mask_path,
            "green_path": self.green_path,
            "label": self.label,
            "labeled_by": self.labeled_by,
            "labeled_at": self.labeled_at,
        }
        d.update(self.extra)
        return d

    @classmethod
    def from_json(cls, d: dict, line_number: int | None = None) -> "ManifestRecord":
        try:
            known = {
                "object_id": d["object_id"],
                "source_image": d["source_image"],
                "bbox": tuple(d["bbox"]),
                "centroid": tuple(d["centroid"]),
                "crop_path": d["crop_path"],
                "mask_path": d["mask_path"],
                "green_path": d["green_path"],
                "label": d.get("label", UNLABELED),
                "labeled_by": d.get("labeled_by"),
                "labeled_at": d.get("labeled_at"),
            }
        except KeyError as exc:
            raise ManifestError(f"missing field {exc}", line_number) from exc
        consumed = set(known) | {"label", "labeled_by", "labeled_at"}
        extra = {k: v for k, v in d.items() if k not in consumed}
        try:
            return cls(**known, extra=extra)
        except ValueError as exc:
            raise ManifestError(str(exc), line_number) from exc


def _check_label(label) -> None:
    if label in (UNLABELED, DISCARDED):
        return
    if isinstance(label, int) and label in CLASS_IDS:
        return
    raise ValueError(f"label must be one of {CLASS_IDS}, {UNLABELED!r} or {DISCARDED!r}, got {label!r}")


def write_manifest(records: list[ManifestRecord], path: str | Path) -> None:
    """Atomically replace the manifest: write a temp file, fsync, rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec.to_json()) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def read_manifest(path: str | Path) -> list[ManifestRecord]:
    path = Path(path)
    records = []
    seen: set[str] = set()
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"malformed JSON: {exc.msg}", i) from exc
            if not isinstance(d, dict):
                raise ManifestError("record is not an object", i)
            rec = ManifestRecord.from_json(d, i)
            if rec.object_id in seen:
                raise ManifestError(f"duplicate object_id {rec.object_id!r}", i)
            seen.add(rec.object_id)
            records.append(rec)
    return records


def apply_label(
    record: ManifestRecord,
    label: int | str,
    annotator: str | None = None,
    now: datetime | None = None,
) -> ManifestRecord:
    """Return the record with a new label and fresh audit fields.

    Any transition is allowed after the first labeling; the timestamp records
    the revision.
    """
    _check_label(label)
    stamp = (now or datetime.now(timezone.utc)).isoformat()
    return ManifestRecord(
        object_id=record.object_id,
        source_image=record.source_image,
        bbox=record.bbox,
        centroid=record.centroid,
        crop_path=record.crop_path,
        mask_path=record.mask_path,
        green_path=record.green_path,
        label=label,
        labeled_by=annotator if label != UNLABELED else None,
        labeled_at=stamp if label != UNLABELED else None,
        extra=dict(record.extra),
    )
