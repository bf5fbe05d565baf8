/** Thin JSON client for the label service; fetch is injectable for tests. */
export class ApiClient {
    constructor(base = "", fetchImpl = (input, init) => fetch(input, init)) {
        this.base = base;
        this.fetchImpl = fetchImpl;
    }
    async getJson(path) {
        const resp = await this.fetchImpl(this.base + path);
        if (!resp.ok) {
            throw new Error(`GET ${path} failed: ${resp.status}`);
        }
        return (await resp.json());
    }
    listObjects(status, page, pageSize) {
        const params = new URLSearchParams({
            status,
            page: String(page),
            page_size: String(pageSize),
        });
        return this.getJson(`/api/objects?${params}`);
    }
    async getObject(objectId) {
        return this.getJson(`/api/objects/${encodeURIComponent(objectId)}`);
    }
    progress() {
        return this.getJson("/api/progress");
    }
    async classes() {
        const body = await this.getJson("/api/classes");
        return body.classes;
    }
    /** POST a label mutation carrying the revision this client last saw. */
    async writeLabel(objectId, action, revision, annotator) {
        const resp = await this.fetchImpl(`${this.base}/api/objects/${encodeURIComponent(objectId)}/label`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ ...action, revision, annotator }),
        });
        const body = await resp.json();
        if (resp.status === 200) {
            return { kind: "ok", object: body.object, revision: body.revision };
        }
        if (resp.status === 409 && body.retryable) {
            return { kind: "stale", object: body.object, revision: body.revision };
        }
        return { kind: "error", message: body.error ?? `status ${resp.status}` };
    }
}
