import { ApiClient } from "./api.js";
import { LabelingSession } from "./session.js";
import { pageLabel } from "./paging.js";
import { ApiObject, ClassInfo, Progress, StatusFilter } from "./types.js";

const CLASS_KEYS: Record<number, string> = { 1: "1", 2: "2", 3: "3", 4: "4", 5: "5" };

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text !== undefined) {
        node.textContent = text;
    }
    return node;
}

function labelBadge(obj: ApiObject, classes: ClassInfo[]): HTMLElement {
    if (obj.label === "unlabeled") {
        return el("span", "badge badge-unlabeled", "unlabeled");
    }
    if (obj.label === "discarded") {
        return el("span", "badge badge-discarded", "discarded");
    }
    const info = classes.find((c) => c.id === obj.label);
    return el("span", `badge badge-class-${obj.label}`, info ? `${obj.label}: ${info.name}` : String(obj.label));
}

export class App {
    private session: LabelingSession;
    private classes: ClassInfo[] = [];
    private progress: Progress | null = null;
    private notice = "";

    constructor(private readonly api: ApiClient, private readonly root: HTMLElement) {
        this.session = new LabelingSession(api, {
            onUpdate: () => this.render(),
            onNotice: (message) => {
                this.notice = message;
                this.render();
                setTimeout(() => {
                    this.notice = "";
                    this.render();
                }, 4000);
            },
        });
    }

    async start(): Promise<void> {
        document.addEventListener("keydown", (ev) => {
            if (ev.target instanceof HTMLInputElement || ev.target instanceof HTMLSelectElement) {
                return;
            }
            void this.onKey(ev.key);
        });
        try {
            this.classes = await this.api.classes();
            await this.refreshProgress();
            await this.session.load("unlabeled", 0);
        } catch (err) {
            this.root.replaceChildren(
                el("div", "banner banner-error", `label service unreachable: ${String(err)}`),
            );
        }
    }

    private async onKey(key: string): Promise<void> {
        const action = await this.session.handleKey(key);
        if (action && (action.kind === "assign" || action.kind === "discard" || action.kind === "unlabel")) {
            await this.refreshProgress();
        }
    }

    private async refreshProgress(): Promise<void> {
        this.progress = await this.api.progress();
        this.render();
    }

    private header(): HTMLElement {
        const head = el("header");
        head.appendChild(el("h1", undefined, "slidebench labeling"));
        if (this.progress) {
            const p = this.progress;
            const bar = el("div", "progress");
            bar.appendChild(
                el(
                    "span",
                    undefined,
                    `${p.labeled} labeled + ${p.discarded} discarded of ${p.total} ` +
                        `(${p.percent_labeled.toFixed(1)}% labeled)`,
                ),
            );
            const perClass = Object.entries(p.by_class)
                .map(([id, count]) => `${id}:${count}`)
                .join("  ");
            bar.appendChild(el("span", "per-class", perClass));
            head.appendChild(bar);
        }
        if (this.notice) {
            head.appendChild(el("div", "banner", this.notice));
        }
        return head;
    }

    private controls(): HTMLElement {
        const bar = el("div", "controls");
        const select = el("select");
        for (const status of ["unlabeled", "labeled", "discarded", "all"] as StatusFilter[]) {
            const opt = el("option", undefined, status);
            opt.value = status;
            if (status === this.session.filter) {
                opt.selected = true;
            }
            select.appendChild(opt);
        }
        select.addEventListener("change", () => void this.session.load(select.value as StatusFilter, 0));
        bar.appendChild(select);

        const prev = el("button", undefined, "◀ page");
        prev.disabled = this.session.page <= 0;
        prev.addEventListener("click", () => void this.session.load(undefined, this.session.page - 1));
        const next = el("button", undefined, "page ▶");
        next.disabled = this.session.page >= this.session.pages - 1;
        next.addEventListener("click", () => void this.session.load(undefined, this.session.page + 1));
        bar.append(prev, el("span", "page-label", pageLabel(this.session.page, this.session.total, this.session.pageSize)), next);
        bar.appendChild(el("span", "hint", "keys: 1–5 assign · d discard · u unlabel · ←/→ move · Esc close"));
        return bar;
    }

    private grid(): HTMLElement {
        if (this.session.objects.length === 0) {
            const empty = el("div", "empty");
            empty.appendChild(el("p", undefined, "nothing to review under this filter"));
            return empty;
        }
        const grid = el("div", "grid");
        this.session.objects.forEach((obj, index) => {
            const card = el("div", "card" + (index === this.session.detailIndex ? " card-open" : ""));
            const img = el("img");
            img.src = obj.images.green;
            img.loading = "lazy";
            card.appendChild(img);
            card.appendChild(el("div", "card-id", obj.object_id));
            card.appendChild(labelBadge(obj, this.classes));
            card.addEventListener("click", () => this.session.open(index));
            grid.appendChild(card);
        });
        return grid;
    }

    private detail(): HTMLElement | null {
        const obj = this.session.current();
        if (!obj) {
            return null;
        }
        const overlay = el("div", "detail");
        const panel = el("div", "detail-panel");
        panel.appendChild(el("h2", undefined, obj.object_id));
        const row = el("div", "detail-images");
        for (const kind of ["crop", "mask", "green"] as const) {
            const fig = el("figure");
            const img = el("img");
            img.src = obj.images[kind];
            fig.appendChild(img);
            fig.appendChild(el("figcaption", undefined, kind));
            row.appendChild(fig);
        }
        panel.appendChild(row);
        panel.appendChild(labelBadge(obj, this.classes));

        const buttons = el("div", "class-buttons");
        for (const info of this.classes) {
            const btn = el("button", undefined, `${CLASS_KEYS[info.id]} · ${info.name}`);
            btn.addEventListener("click", () => void this.onKey(String(info.id)));
            buttons.appendChild(btn);
        }
        const discard = el("button", "danger", "d · discard");
        discard.addEventListener("click", () => void this.onKey("d"));
        const revert = el("button", undefined, "u · unlabel");
        revert.addEventListener("click", () => void this.onKey("u"));
        buttons.append(discard, revert);
        panel.appendChild(buttons);

        overlay.appendChild(panel);
        overlay.addEventListener("click", (ev) => {
            if (ev.target === overlay) {
                this.session.close();
            }
        });
        return overlay;
    }

    render(): void {
        const parts: HTMLElement[] = [this.header(), this.controls(), this.grid()];
        const detail = this.detail();
        if (detail) {
            parts.push(detail);
        }
        this.root.replaceChildren(...parts);
    }
}
