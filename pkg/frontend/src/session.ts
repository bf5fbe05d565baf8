import { ApiClient } from "./api.js";
import { KeyAction, keyToAction } from "./keys.js";
import { clampPage } from "./paging.js";
import { ApiObject, StatusFilter } from "./types.js";

export interface SessionEvents {
    onUpdate: () => void;
    onNotice: (message: string) => void;
}

const silent: SessionEvents = { onUpdate: () => undefined, onNotice: () => undefined };

/**
 * Client-side labeling state machine.
 *
 * Writes are optimistic: the card shows the new label immediately, then the
 * server's confirmed record replaces it. A stale-revision rejection reloads
 * the server's copy of the card and revision, so what is rendered after
 * reconciliation is always server-confirmed state.
 */
export class LabelingSession {
    objects: ApiObject[] = [];
    revision = 0;
    filter: StatusFilter = "unlabeled";
    page = 0;
    pageSize = 24;
    pages = 0;
    total = 0;
    detailIndex: number | null = null;

    constructor(
        private readonly api: ApiClient,
        private readonly events: SessionEvents = silent,
        private readonly annotator?: string,
    ) {}

    async load(filter?: StatusFilter, page?: number): Promise<void> {
        if (filter !== undefined) {
            this.filter = filter;
            this.page = 0;
        }
        if (page !== undefined) {
            this.page = page;
        }
        const body = await this.api.listObjects(this.filter, this.page, this.pageSize);
        this.objects = body.objects;
        this.revision = body.revision;
        this.pages = body.pages;
        this.total = body.total;
        this.page = clampPage(body.page, body.total, body.page_size);
        if (this.detailIndex !== null && this.detailIndex >= this.objects.length) {
            this.detailIndex = this.objects.length ? this.objects.length - 1 : null;
        }
        this.events.onUpdate();
    }

    current(): ApiObject | null {
        return this.detailIndex === null ? null : this.objects[this.detailIndex] ?? null;
    }

    open(index: number): void {
        if (index >= 0 && index < this.objects.length) {
            this.detailIndex = index;
            this.events.onUpdate();
        }
    }

    close(): void {
        this.detailIndex = null;
        this.events.onUpdate();
    }

    move(step: number): void {
        if (this.detailIndex === null || this.objects.length === 0) {
            return;
        }
        const next = this.detailIndex + step;
        if (next >= 0 && next < this.objects.length) {
            this.detailIndex = next;
            this.events.onUpdate();
        }
    }

    /** Route a keyboard event; returns the action taken, if any. */
    async handleKey(key: string): Promise<KeyAction | null> {
        const action = keyToAction(key);
        if (action === null || this.detailIndex === null) {
            return null;
        }
        switch (action.kind) {
            case "assign":
                await this.write({ class: action.classId });
                break;
            case "discard":
                await this.write({ discard: true });
                break;
            case "unlabel":
                await this.write({ unlabel: true });
                break;
            case "next":
                this.move(1);
                break;
            case "previous":
                this.move(-1);
                break;
            case "close":
                this.close();
                break;
        }
        return action;
    }

    /** Optimistic write with rollback-to-server on rejection. */
    async write(action: { class?: number; discard?: boolean; unlabel?: boolean }): Promise<"ok" | "stale" | "error"> {
        const index = this.detailIndex;
        if (index === null) {
            return "error";
        }
        const target = this.objects[index];
        const before = { ...target };
        // optimistic render
        target.label = action.class ?? (action.discard ? "discarded" : "unlabeled");
        this.events.onUpdate();

        const result = await this.api.writeLabel(target.object_id, action, this.revision, this.annotator);
        if (result.kind === "ok") {
            this.objects[index] = result.object;
            this.revision = result.revision;
            this.advanceToNextUnlabeled(index);
            this.events.onUpdate();
            return "ok";
        }
        if (result.kind === "stale") {
            // reconcile: adopt the server's record and revision, then tell the user
            this.objects[index] = result.object;
            this.revision = result.revision;
            this.events.onNotice("another session updated this object; showing the server copy");
            this.events.onUpdate();
            return "stale";
        }
        this.objects[index] = before;
        this.events.onNotice(`label rejected: ${result.message}`);
        this.events.onUpdate();
        return "error";
    }

    /** After a confirmed write, jump to the next still-unlabeled card. */
    private advanceToNextUnlabeled(from: number): void {
        for (let i = from + 1; i < this.objects.length; i++) {
            if (this.objects[i].label === "unlabeled") {
                this.detailIndex = i;
                return;
            }
        }
        for (let i = 0; i < from; i++) {
            if (this.objects[i].label === "unlabeled") {
                this.detailIndex = i;
                return;
            }
        }
        // nothing left unlabeled on this page; stay put
    }
}
