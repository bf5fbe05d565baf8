import { ApiObject, ClassInfo, ObjectPage, Progress, StatusFilter, WriteResult } from "./types.js";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin JSON client for the label service; fetch is injectable for tests. */
export class ApiClient {
    constructor(
        private readonly base: string = "",
        private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    ) {}

    private async getJson<T>(path: string): Promise<T> {
        const resp = await this.fetchImpl(this.base + path);
        if (!resp.ok) {
            throw new Error(`GET ${path} failed: ${resp.status}`);
        }
        return (await resp.json()) as T;
    }

    listObjects(status: StatusFilter, page: number, pageSize: number): Promise<ObjectPage> {
        const params = new URLSearchParams({
            status,
            page: String(page),
            page_size: String(pageSize),
        });
        return this.getJson(`/api/objects?${params}`);
    }

    async getObject(objectId: string): Promise<{ revision: number; object: ApiObject }> {
        return this.getJson(`/api/objects/${encodeURIComponent(objectId)}`);
    }

    progress(): Promise<Progress> {
        return this.getJson("/api/progress");
    }

    async classes(): Promise<ClassInfo[]> {
        const body = await this.getJson<{ classes: ClassInfo[] }>("/api/classes");
        return body.classes;
    }

    /** POST a label mutation carrying the revision this client last saw. */
    async writeLabel(
        objectId: string,
        action: { class?: number; discard?: boolean; unlabel?: boolean },
        revision: number,
        annotator?: string,
    ): Promise<WriteResult> {
        const resp = await this.fetchImpl(
            `${this.base}/api/objects/${encodeURIComponent(objectId)}/label`,
            {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify({ ...action, revision, annotator }),
            },
        );
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
