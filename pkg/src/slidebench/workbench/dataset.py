"""Export labeled objects to feature sets, plus the feature-matrix file format.

Feature files carry one ASCII header line
    slidebench-features v1 kind=<hog|lbp> dim=<d> count=<n>
followed by count*dim row-major float64 little-endian values. Labels ride in
a sidecar "<file>.labels" text file, one integer per row.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..features import FeatureVector, HogParams, LbpParams, hog, lbp
from ..learn.data import LabeledSet
from ..pipeline import SegmentedObject
from ..raster import read_image, rgb_to_gray, write_image
from .classes import EXCLUDED_CLASS_ID
from .manifest import DISCARDED, UNLABELED, ManifestRecord

HEADER_PREFIX = "slidebench-features v1"


def objects_to_records(
    objects: list[SegmentedObject], out_dir: str | Path, manifest_dir: str | Path | None = None
) -> list[ManifestRecord]:
    """Write crop/mask/green PNG triplets and build unlabeled manifest records.

    Paths in the records are relative to manifest_dir (default: out_dir).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = Path(manifest_dir) if manifest_dir is not None else out_dir
    records = []
    for obj in objects:
        crop = out_dir / f"{obj.object_id}_crop.png"
        mask = out_dir / f"{obj.object_id}_mask.png"
        green = out_dir / f"{obj.object_id}_green.png"
        write_image(obj.crop, crop)
        write_image(obj.mask, mask)
        write_image(obj.green_crop, green)
        records.append(
            ManifestRecord(
                object_id=obj.object_id,
                source_image=obj.source,
                bbox=obj.bbox,
                centroid=obj.centroid,
                crop_path=str(crop.relative_to(base)),
                mask_path=str(mask.relative_to(base)),
                green_path=str(green.relative_to(base)),
                extra={"oversize": obj.oversize, "crop_origin": list(obj.crop_origin)},
            )
        )
    return records


def extract_features(
    image_path: str | Path, kind: str, hog_params: HogParams, lbp_params: LbpParams
) -> FeatureVector:
    gray = rgb_to_gray(read_image(image_path))
    if kind == "hog":
        return hog(gray, hog_params)
    if kind == "lbp":
        return lbp(gray, lbp_params)
    raise ValueError(f"unknown descriptor kind {kind!r}")


def export_dataset(
    records: list[ManifestRecord],
    image_root: str | Path,
    kind: str = "hog",
    hog_params: HogParams = HogParams(),
    lbp_params: LbpParams = LbpParams(),
) -> LabeledSet:
    """Feature-extract the green-background crops of labeled, kept records.

    Discarded and unlabeled rows are skipped, as is the reference class whose
    population is too small to train on. Needs at least two usable classes.
    """
    root = Path(image_root)
    rows = []
    labels = []
    for rec in records:
        if rec.label in (UNLABELED, DISCARDED) or rec.label == EXCLUDED_CLASS_ID:
            continue
        path = root / rec.green_path
        if not path.exists():
            raise FileNotFoundError(f"missing crop file {path} for object {rec.object_id}")
        rows.append(extract_features(path, kind, hog_params, lbp_params).values)
        labels.append(int(rec.label))
    if len(set(labels)) < 2:
        raise ValueError(
            f"manifest yields {len(set(labels))} usable class(es); need at least 2 to train"
        )
    return LabeledSet(np.stack(rows), np.array(labels), kind=kind)


def save_features(path: str | Path, data: LabeledSet) -> None:
    path = Path(path)
    n, d = data.features.shape
    with open(path, "wb") as fh:
        fh.write(f"{HEADER_PREFIX} kind={data.kind} dim={d} count={n}\n".encode())
        fh.write(np.ascontiguousarray(data.features, dtype="<f8").tobytes())
    Path(f"{path}.labels").write_text("".join(f"{int(l)}\n" for l in data.labels))


def load_features(path: str | Path) -> LabeledSet:
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.readline().decode().strip()
        if not header.startswith(HEADER_PREFIX):
            raise ValueError(f"{path} is not a feature file")
        fields = dict(part.split("=", 1) for part in header[len(HEADER_PREFIX) :].split())
        kind = fields["kind"]
        dim = int(fields["dim"])
        count = int(fields["count"])
        raw = fh.read(count * dim * 8)
        if len(raw) != count * dim * 8:
            raise ValueError(f"{path} truncated: expected {count * dim} values")
        features = np.frombuffer(raw, dtype="<f8").reshape(count, dim).copy()
    labels = np.array([int(line) for line in Path(f"{path}.labels").read_text().split()])
    if labels.size != count:
        raise ValueError(f"{path}.labels holds {labels.size} labels for {count} rows")
    return LabeledSet(features, labels, kind=kind)
