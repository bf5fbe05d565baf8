import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest

from slidebench.raster import BinaryMask, RgbImage, write_image
from slidebench.workbench.manifest import ManifestRecord, read_manifest, write_manifest
from slidebench.workbench.server import make_server


@pytest.fixture
def service(tmp_path):
    rng = np.random.default_rng(0)
    (tmp_path / "objects").mkdir()
    records = []
    for i in range(30):
        oid = f"obj-{i:03d}"
        crop = RgbImage(rng.integers(0, 256, size=(84, 84, 3), dtype=np.uint8))
        mask = BinaryMask(rng.random((84, 84)) < 0.5)
        write_image(crop, tmp_path / "objects" / f"{oid}_crop.png")
        write_image(mask, tmp_path / "objects" / f"{oid}_mask.png")
        write_image(crop, tmp_path / "objects" / f"{oid}_green.png")
        records.append(
            ManifestRecord(
                object_id=oid,
                source_image="scene.png",
                bbox=(0, 0, 10, 10),
                centroid=(5.0, 5.0),
                crop_path=f"objects/{oid}_crop.png",
                mask_path=f"objects/{oid}_mask.png",
                green_path=f"objects/{oid}_green.png",
            )
        )
    manifest = tmp_path / "manifest.jsonl"
    write_manifest(records, manifest)
    httpd = make_server(manifest, port=0)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    port = httpd.server_address[1]
    yield f"http://127.0.0.1:{port}", manifest
    httpd.shutdown()
    httpd.server_close()


def get(base, path):
    with urllib.request.urlopen(base + path) as resp:
        return json.loads(resp.read()), resp.status


def post(base, path, payload):
    req = urllib.request.Request(
        base + path, data=json.dumps(payload).encode(), headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read()), resp.status
    except urllib.error.HTTPError as err:
        return json.loads(err.read()), err.code


class TestObjectListing:
    def test_pagination(self, service):
        base, _ = service
        body, _ = get(base, "/api/objects?status=unlabeled&page=0&page_size=24")
        assert body["total"] == 30
        assert body["pages"] == 2
        assert len(body["objects"]) == 24
        body2, _ = get(base, "/api/objects?status=unlabeled&page=1&page_size=24")
        assert len(body2["objects"]) == 6
        assert "revision" in body

    def test_status_filter(self, service):
        base, _ = service
        body, _ = get(base, "/api/objects")
        rev = body["revision"]
        post(base, "/api/objects/obj-000/label", {"discard": True, "revision": rev})
        body, _ = get(base, "/api/objects?status=discarded")
        assert [o["object_id"] for o in body["objects"]] == ["obj-000"]

    def test_single_object(self, service):
        base, _ = service
        body, status = get(base, "/api/objects/obj-003")
        assert status == 200
        assert body["object"]["object_id"] == "obj-003"
        assert body["object"]["images"]["green"].endswith("kind=green")

    def test_unknown_object_404(self, service):
        base, _ = service
        try:
            urllib.request.urlopen(base + "/api/objects/nope")
            assert False
        except urllib.error.HTTPError as err:
            assert err.code == 404


class TestImages:
    def test_serves_png_with_revision_header(self, service):
        base, _ = service
        with urllib.request.urlopen(base + "/api/objects/obj-001/image?kind=mask") as resp:
            assert resp.headers["Content-Type"] == "image/png"
            assert resp.headers["X-Manifest-Revision"] == "1"
            assert resp.read()[:4] == b"\x89PNG"

    def test_bad_kind_rejected(self, service):
        base, _ = service
        try:
            urllib.request.urlopen(base + "/api/objects/obj-001/image?kind=thumb")
            assert False
        except urllib.error.HTTPError as err:
            assert err.code == 400


class TestLabeling:
    def test_label_roundtrip_durable(self, service):
        base, manifest = service
        body, _ = get(base, "/api/progress")
        rev = body["revision"]
        resp, status = post(base, "/api/objects/obj-004/label", {"class": 3, "revision": rev})
        assert status == 200
        assert resp["object"]["label"] == 3
        body, _ = get(base, "/api/objects/obj-004")
        assert body["object"]["label"] == 3
        on_disk = {r.object_id: r for r in read_manifest(manifest)}
        assert on_disk["obj-004"].label == 3
        assert on_disk["obj-004"].labeled_at is not None

    def test_invalid_class_rejected(self, service):
        base, _ = service
        body, _ = get(base, "/api/progress")
        resp, status = post(base, "/api/objects/obj-005/label", {"class": 7, "revision": body["revision"]})
        assert status == 400

    def test_missing_revision_rejected(self, service):
        base, _ = service
        resp, status = post(base, "/api/objects/obj-005/label", {"class": 2})
        assert status == 400

    def test_stale_revision_conflict_is_retryable(self, service):
        base, _ = service
        body, _ = get(base, "/api/progress")
        rev = body["revision"]
        resp1, s1 = post(base, "/api/objects/obj-006/label", {"class": 1, "revision": rev})
        assert s1 == 200
        # a second writer racing with the old revision must be turned away
        resp2, s2 = post(base, "/api/objects/obj-006/label", {"class": 2, "revision": rev})
        assert s2 == 409
        assert resp2["error"] == "stale_revision"
        assert resp2["retryable"] is True
        # reconciling with the fresh revision succeeds
        resp3, s3 = post(base, "/api/objects/obj-006/label", {"class": 2, "revision": resp2["revision"]})
        assert s3 == 200
        assert resp3["object"]["label"] == 2

    def test_unlabel_reverts(self, service):
        base, _ = service
        body, _ = get(base, "/api/progress")
        resp, _ = post(base, "/api/objects/obj-007/label", {"class": 4, "revision": body["revision"]})
        resp2, status = post(base, "/api/objects/obj-007/label", {"unlabel": True, "revision": resp["revision"]})
        assert status == 200
        assert resp2["object"]["label"] == "unlabeled"

    def test_concurrent_writers_serialize(self, service):
        base, manifest = service
        outcomes = []

        def writer(oid):
            body, _ = get(base, "/api/progress")
            resp, status = post(base, f"/api/objects/{oid}/label", {"class": 2, "revision": body["revision"]})
            outcomes.append(status)

        threads = [threading.Thread(target=writer, args=(f"obj-{i:03d}",)) for i in range(10, 20)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert set(outcomes) <= {200, 409}
        labeled = sum(1 for r in read_manifest(manifest) if r.label == 2)
        assert labeled == outcomes.count(200)


class TestProgressAndClasses:
    def test_progress_counts(self, service):
        base, _ = service
        for i in range(10):
            body, _ = get(base, "/api/progress")
            target = 1 + (i % 5)
            post(base, f"/api/objects/obj-{i:03d}/label", {"class": target, "revision": body["revision"]})
        body, _ = get(base, "/api/progress")
        assert body["total"] == 30
        assert body["labeled"] == 10
        assert body["unlabeled"] == 20
        assert body["percent_labeled"] == pytest.approx(100 * 10 / 30)
        assert sum(body["by_class"].values()) == 10

    def test_classes_table(self, service):
        base, _ = service
        body, _ = get(base, "/api/classes")
        assert [c["id"] for c in body["classes"]] == [1, 2, 3, 4, 5]
        assert body["classes"][4]["reference_count"] == 43
