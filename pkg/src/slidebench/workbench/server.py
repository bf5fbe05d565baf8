"""HTTP label service backing the browser labeling workflow.

JSON endpoints under /api, object images straight from disk, and optional
static files for the single-page frontend. Every response carries the
current manifest revision; label writes must present the revision they saw
and are rejected as retryable when it is stale. All mutations funnel through
one lock and rewrite the manifest atomically before they are acknowledged.
"""
from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .classes import CLASS_TABLE
from .manifest import DISCARDED, UNLABELED, ManifestRecord, apply_label, read_manifest, write_manifest

DEFAULT_PAGE_SIZE = 24


class LabelService:
    """Manifest state machine shared by all request threads."""

    def __init__(self, manifest_path: str | Path, image_root: str | Path | None = None):
        self.manifest_path = Path(manifest_path)
        self.image_root = Path(image_root) if image_root else self.manifest_path.parent
        self.records: list[ManifestRecord] = read_manifest(self.manifest_path)
        self.index = {r.object_id: i for i, r in enumerate(self.records)}
        self.revision = 1
        self.lock = threading.Lock()

    def snapshot(self, status: str | None, class_id: int | None) -> list[ManifestRecord]:
        with self.lock:
            records = list(self.records)
        if status and status != "all":
            records = [r for r in records if r.status == status]
        if class_id is not None:
            records = [r for r in records if r.label == class_id]
        return records

    def get(self, object_id: str) -> ManifestRecord | None:
        with self.lock:
            i = self.index.get(object_id)
            return self.records[i] if i is not None else None

    def label(
        self, object_id: str, label, annotator: str | None, seen_revision: int
    ) -> tuple[str, ManifestRecord | None, int]:
        """Returns (outcome, record, revision); outcome in ok|missing|stale."""
        with self.lock:
            i = self.index.get(object_id)
            if i is None:
                return "missing", None, self.revision
            if seen_revision != self.revision:
                return "stale", self.records[i], self.revision
            updated = apply_label(self.records[i], label, annotator)
            self.records[i] = updated
            write_manifest(self.records, self.manifest_path)
            self.revision += 1
            return "ok", updated, self.revision

    def progress(self) -> dict:
        with self.lock:
            records = list(self.records)
            revision = self.revision
        by_class = {str(c.id): 0 for c in CLASS_TABLE}
        labeled = discarded = 0
        for r in records:
            if r.label == DISCARDED:
                discarded += 1
            elif r.label != UNLABELED:
                labeled += 1
                by_class[str(r.label)] += 1
        total = len(records)
        return {
            "revision": revision,
            "total": total,
            "labeled": labeled,
            "discarded": discarded,
            "unlabeled": total - labeled - discarded,
            "percent_labeled": (100.0 * labeled / total) if total else 0.0,
            "by_class": by_class,
        }


def _record_payload(rec: ManifestRecord) -> dict:
    d = rec.to_json()
    d["status"] = rec.status
    d["images"] = {
        kind: f"/api/objects/{rec.object_id}/image?kind={kind}"
        for kind in ("crop", "mask", "green")
    }
    return d


class _Handler(BaseHTTPRequestHandler):
    service: LabelService
    static_dir: Path | None = None

    # quiet the default stderr-per-request logging
    def log_message(self, fmt, *args):
        pass

    def _send_json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_file(self, path: Path, revision: int | None = None) -> None:
        data = path.read_bytes()
        ctype = mimetypes.guess_type(str(path))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        if revision is not None:
            self.send_header("X-Manifest-Revision", str(revision))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        url = urlparse(self.path)
        query = {k: v[-1] for k, v in parse_qs(url.query).items()}
        parts = [p for p in url.path.split("/") if p]
        try:
            if parts[:2] == ["api", "objects"] and len(parts) == 2:
                return self._list_objects(query)
            if parts[:2] == ["api", "objects"] and len(parts) == 3:
                return self._get_object(parts[2])
            if parts[:2] == ["api", "objects"] and len(parts) == 4 and parts[3] == "image":
                return self._get_image(parts[2], query.get("kind", "crop"))
            if parts == ["api", "progress"]:
                return self._send_json(self.service.progress())
            if parts == ["api", "classes"]:
                with self.service.lock:
                    revision = self.service.revision
                return self._send_json(
                    {
                        "revision": revision,
                        "classes": [
                            {"id": c.id, "name": c.name, "reference_count": c.reference_count}
                            for c in CLASS_TABLE
                        ],
                    }
                )
            return self._static(url.path)
        except BrokenPipeError:
            pass

    def _list_objects(self, query: dict) -> None:
        status = query.get("status", "all")
        if status not in ("all", UNLABELED, "labeled", DISCARDED):
            return self._send_json({"error": f"unknown status {status!r}"}, 400)
        class_id = None
        if "class" in query:
            try:
                class_id = int(query["class"])
            except ValueError:
                return self._send_json({"error": "class must be an integer"}, 400)
        try:
            page = int(query.get("page", "0"))
            page_size = int(query.get("page_size", str(DEFAULT_PAGE_SIZE)))
        except ValueError:
            return self._send_json({"error": "page and page_size must be integers"}, 400)
        if page < 0 or page_size < 1:
            return self._send_json({"error": "bad paging"}, 400)
        records = self.service.snapshot(status, class_id)
        with self.service.lock:
            revision = self.service.revision
        total = len(records)
        pages = (total + page_size - 1) // page_size
        window = records[page * page_size : (page + 1) * page_size]
        self._send_json(
            {
                "revision": revision,
                "total": total,
                "page": page,
                "page_size": page_size,
                "pages": pages,
                "objects": [_record_payload(r) for r in window],
            }
        )

    def _get_object(self, object_id: str) -> None:
        rec = self.service.get(object_id)
        if rec is None:
            return self._send_json({"error": f"no object {object_id!r}"}, 404)
        with self.service.lock:
            revision = self.service.revision
        self._send_json({"revision": revision, "object": _record_payload(rec)})

    def _get_image(self, object_id: str, kind: str) -> None:
        rec = self.service.get(object_id)
        if rec is None:
            return self._send_json({"error": f"no object {object_id!r}"}, 404)
        paths = {"crop": rec.crop_path, "mask": rec.mask_path, "green": rec.green_path}
        if kind not in paths:
            return self._send_json({"error": "kind must be crop, mask or green"}, 400)
        path = self.service.image_root / paths[kind]
        if not path.exists():
            return self._send_json({"error": f"missing file {paths[kind]}"}, 404)
        with self.service.lock:
            revision = self.service.revision
        self._send_file(path, revision)

    def _static(self, path: str) -> None:
        if self.static_dir is None:
            return self._send_json({"error": "not found"}, 404)
        rel = path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            return self._send_json({"error": "not found"}, 404)
        self._send_file(target)

    def do_POST(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        if not (parts[:2] == ["api", "objects"] and len(parts) == 4 and parts[3] == "label"):
            return self._send_json({"error": "not found"}, 404)
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length) or b"{}")
        except (ValueError, json.JSONDecodeError):
            return self._send_json({"error": "body must be JSON"}, 400)
        if not isinstance(body, dict):
            return self._send_json({"error": "body must be a JSON object"}, 400)

        if "revision" not in body:
            return self._send_json({"error": "body must carry the revision you saw"}, 400)
        try:
            seen = int(body["revision"])
        except (TypeError, ValueError):
            return self._send_json({"error": "revision must be an integer"}, 400)

        if body.get("discard") is True:
            label = DISCARDED
        elif body.get("unlabel") is True:
            label = UNLABELED
        elif "class" in body:
            if not isinstance(body["class"], int) or not 1 <= body["class"] <= 5:
                return self._send_json({"error": "class must be an integer 1..5"}, 400)
            label = body["class"]
        else:
            return self._send_json(
                {"error": 'body needs {"class": 1..5}, {"discard": true} or {"unlabel": true}'}, 400
            )

        annotator = body.get("annotator")
        outcome, rec, revision = self.service.label(parts[2], label, annotator, seen)
        if outcome == "missing":
            return self._send_json({"error": f"no object {parts[2]!r}", "revision": revision}, 404)
        if outcome == "stale":
            return self._send_json(
                {
                    "error": "stale_revision",
                    "retryable": True,
                    "revision": revision,
                    "object": _record_payload(rec),
                },
                409,
            )
        self._send_json({"revision": revision, "object": _record_payload(rec)})


def make_server(
    manifest_path: str | Path,
    port: int = 0,
    image_root: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Bind the label service; port 0 picks a free port (see server_port)."""
    service = LabelService(manifest_path, image_root)
    handler = type(
        "BoundHandler",
        (_Handler,),
        {"service": service, "static_dir": Path(static_dir) if static_dir else None},
    )
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve(
    manifest_path: str | Path,
    port: int,
    image_root: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> None:
    """Run the label service until interrupted."""
    httpd = make_server(manifest_path, port, image_root, static_dir)
    host, bound_port = httpd.server_address[:2]
    print(f"label service on http://{host}:{bound_port}/ (manifest: {manifest_path})", flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
