/** Wire types for the label service HTTP API. */

export type Label = number | "unlabeled" | "discarded";

export interface ApiObject {
    object_id: string;
    source_image: string;
    bbox: [number, number, number, number];
    centroid: [number, number];
    label: Label;
    labeled_by: string | null;
    labeled_at: string | null;
    status: "unlabeled" | "labeled" | "discarded";
    images: { crop: string; mask: string; green: string };
}

export interface ObjectPage {
    revision: number;
    total: number;
    page: number;
    page_size: number;
    pages: number;
    objects: ApiObject[];
}

export interface Progress {
    revision: number;
    total: number;
    labeled: number;
    discarded: number;
    unlabeled: number;
    percent_labeled: number;
    by_class: Record<string, number>;
}

export interface ClassInfo {
    id: number;
    name: string;
    reference_count: number;
}

export type StatusFilter = "all" | "unlabeled" | "labeled" | "discarded";

/** Outcome of a label write. */
export type WriteResult =
    | { kind: "ok"; object: ApiObject; revision: number }
    | { kind: "stale"; object: ApiObject; revision: number }
    | { kind: "error"; message: string };
