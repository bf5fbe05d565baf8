import json

import numpy as np
import pytest

from slidebench.learn import LabeledSet
from slidebench.pipeline import PipelineConfig, run_pipeline
from slidebench.raster import write_image
from slidebench.workbench.classes import CLASS_TABLE
from slidebench.workbench.dataset import (
    export_dataset,
    load_features,
    objects_to_records,
    save_features,
)
from slidebench.workbench.manifest import (
    DISCARDED,
    UNLABELED,
    ManifestError,
    ManifestRecord,
    apply_label,
    read_manifest,
    write_manifest,
)
from slidebench.workbench.synthetic import (
    GroundTruthObject,
    InfeasiblePackingError,
    SyntheticSpec,
    generate_synthetic_scene,
)


def _record(i: int, label=UNLABELED) -> ManifestRecord:
    return ManifestRecord(
        object_id=f"obj-{i:03d}",
        source_image="scene.png",
        bbox=(i, i, i + 10, i + 10),
        centroid=(i + 5.0, i + 5.0),
        crop_path=f"objects/obj-{i:03d}_crop.png",
        mask_path=f"objects/obj-{i:03d}_mask.png",
        green_path=f"objects/obj-{i:03d}_green.png",
        label=label,
    )


class TestSynthetic:
    def test_zero_objects_gives_pure_noise_scene(self):
        spec = SyntheticSpec(width=200, height=160, n_objects=0, n_bubbles=0, n_specks=0, seed=3)
        img, truths = generate_synthetic_scene(spec)
        assert truths == []
        assert (img.width, img.height) == (200, 160)

    def test_same_seed_identical(self):
        spec = SyntheticSpec(width=256, height=256, n_objects=3, n_bubbles=1, n_specks=2, seed=21)
        a, _ = generate_synthetic_scene(spec)
        b, _ = generate_synthetic_scene(spec)
        assert np.array_equal(a.pixels, b.pixels)

    def test_disk_radius_15_area_in_range(self):
        spec = SyntheticSpec(width=320, height=320, n_objects=4, radius_range=(15.0, 15.0), n_bubbles=0, n_specks=0, seed=2)
        _, truths = generate_synthetic_scene(spec)
        for t in truths:
            assert 699 <= t.area <= 719

    def test_truth_masks_mutually_disjoint(self):
        spec = SyntheticSpec(width=512, height=512, n_objects=8, n_bubbles=2, n_specks=3, seed=13)
        _, truths = generate_synthetic_scene(spec)
        total = np.zeros((512, 512), dtype=np.int64)
        for t in truths:
            total += t.mask.pixels
        assert total.max() <= 1

    def test_truth_area_matches_mask(self):
        spec = SyntheticSpec(width=400, height=400, n_objects=5, n_bubbles=1, n_specks=2, seed=4)
        _, truths = generate_synthetic_scene(spec)
        for t in truths:
            assert t.area == t.mask.area

    def test_infeasible_packing_raises(self):
        spec = SyntheticSpec(width=128, height=128, n_objects=50, radius_range=(20.0, 22.0), seed=0)
        with pytest.raises(InfeasiblePackingError):
            generate_synthetic_scene(spec)


class TestManifest:
    def test_empty_roundtrip(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_manifest([], path)
        assert read_manifest(path) == []

    def test_records_roundtrip(self, tmp_path):
        path = tmp_path / "m.jsonl"
        records = [_record(0), _record(1, label=3), _record(2, label=DISCARDED)]
        write_manifest(records, path)
        back = read_manifest(path)
        assert back == records

    def test_unknown_fields_preserved(self, tmp_path):
        path = tmp_path / "m.jsonl"
        rec = _record(0)
        rec.extra["reviewer_note"] = "possible bubble"
        write_manifest([rec], path)
        back = read_manifest(path)
        assert back[0].extra["reviewer_note"] == "possible bubble"
        write_manifest(back, path)
        assert read_manifest(path)[0].extra["reviewer_note"] == "possible bubble"

    def test_corrupt_line_reports_line_number(self, tmp_path):
        path = tmp_path / "m.jsonl"
        good = json.dumps(_record(0).to_json())
        path.write_text(good + "\n{broken\n" + good.replace("obj-000", "obj-002") + "\n")
        with pytest.raises(ManifestError) as err:
            read_manifest(path)
        assert err.value.line_number == 2
        assert "line 2" in str(err.value)

    def test_duplicate_ids_rejected(self, tmp_path):
        path = tmp_path / "m.jsonl"
        line = json.dumps(_record(0).to_json())
        path.write_text(line + "\n" + line + "\n")
        with pytest.raises(ManifestError):
            read_manifest(path)

    def test_invalid_label_rejected(self):
        with pytest.raises(ValueError):
            _record(0, label=7)

    def test_apply_label_transitions_with_audit(self):
        rec = _record(0)
        labeled = apply_label(rec, 3, annotator="ann")
        assert labeled.label == 3
        assert labeled.labeled_by == "ann"
        assert labeled.labeled_at is not None
        revised = apply_label(labeled, DISCARDED, annotator="ann2")
        assert revised.label == DISCARDED
        assert revised.labeled_at >= labeled.labeled_at
        back = apply_label(revised, UNLABELED)
        assert back.label == UNLABELED and back.labeled_at is None

    def test_atomic_write_keeps_previous_on_failure(self, tmp_path, monkeypatch):
        path = tmp_path / "m.jsonl"
        write_manifest([_record(0)], path)
        before = path.read_text()

        class Boom(RuntimeError):
            pass

        import slidebench.workbench.manifest as mod

        real_replace = mod.os.replace

        def exploding_replace(src, dst):
            raise Boom()

        monkeypatch.setattr(mod.os, "replace", exploding_replace)
        with pytest.raises(Boom):
            write_manifest([_record(0), _record(1)], path)
        monkeypatch.setattr(mod.os, "replace", real_replace)
        assert path.read_text() == before
        assert list(tmp_path.glob("*.tmp")) == []


class TestExportDataset:
    @pytest.fixture
    def labeled_manifest(self, tmp_path):
        spec = SyntheticSpec(width=360, height=360, n_objects=6, n_bubbles=1, n_specks=2, seed=17)
        img, _ = generate_synthetic_scene(spec)
        objs, _ = run_pipeline(img, PipelineConfig(), source="scene")
        assert len(objs) >= 4
        records = objects_to_records(objs, tmp_path / "objects", manifest_dir=tmp_path)
        labels = [1, 2, 3, DISCARDED] + [5] * (len(records) - 4)
        records = [apply_label(r, l) for r, l in zip(records, labels)]
        return tmp_path, records

    def test_exports_expected_rows(self, labeled_manifest):
        root, records = labeled_manifest
        data = export_dataset(records, root, kind="lbp")
        # discarded row, class-5 rows and unlabeled rows are all absent
        assert len(data) == 3
        assert sorted(np.unique(data.labels)) == [1, 2, 3]
        assert data.dimension == 28

    def test_class5_only_manifest_rejected(self, labeled_manifest):
        root, records = labeled_manifest
        only5 = [apply_label(r, 5) for r in records]
        with pytest.raises(ValueError):
            export_dataset(only5, root)

    def test_missing_crop_file_reported(self, labeled_manifest):
        root, records = labeled_manifest
        broken = records[0]
        broken = ManifestRecord(
            **{**{k: getattr(broken, k) for k in (
                "object_id", "source_image", "bbox", "centroid", "crop_path", "mask_path", "label",
            )}, "green_path": "objects/missing.png"},
        )
        with pytest.raises(FileNotFoundError):
            export_dataset([broken, records[1]], root)

    def test_deterministic(self, labeled_manifest):
        root, records = labeled_manifest
        a = export_dataset(records, root, kind="hog")
        b = export_dataset(records, root, kind="hog")
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)


class TestFeatureFiles:
    def test_roundtrip(self, tmp_path, rng):
        data = LabeledSet(rng.normal(size=(7, 28)), rng.integers(1, 5, size=7), kind="lbp")
        save_features(tmp_path / "f.bin", data)
        back = load_features(tmp_path / "f.bin")
        assert back.kind == "lbp"
        assert np.array_equal(back.features, data.features)
        assert np.array_equal(back.labels, data.labels)

    def test_truncated_file_rejected(self, tmp_path, rng):
        data = LabeledSet(rng.normal(size=(4, 6)), np.array([1, 2, 3, 4]))
        save_features(tmp_path / "f.bin", data)
        raw = (tmp_path / "f.bin").read_bytes()
        (tmp_path / "f.bin").write_bytes(raw[:-16])
        with pytest.raises(ValueError):
            load_features(tmp_path / "f.bin")


def test_class_table_is_fixed():
    assert [c.id for c in CLASS_TABLE] == [1, 2, 3, 4, 5]
    assert [c.reference_count for c in CLASS_TABLE] == [1850, 903, 9558, 999, 43]
