/** Pagination arithmetic shared by the grid and the pager control. */

export function pageCount(total: number, pageSize: number): number {
    if (pageSize < 1) {
        throw new Error("page size must be positive");
    }
    return Math.ceil(total / pageSize);
}

export function clampPage(page: number, total: number, pageSize: number): number {
    const pages = pageCount(total, pageSize);
    if (pages === 0) {
        return 0;
    }
    return Math.min(Math.max(page, 0), pages - 1);
}

export function pageLabel(page: number, total: number, pageSize: number): string {
    const pages = pageCount(total, pageSize);
    return pages === 0 ? "0 / 0" : `${page + 1} / ${pages}`;
}
