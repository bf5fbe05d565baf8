/** Pagination arithmetic shared by the grid and the pager control. */
export function pageCount(total, pageSize) {
    if (pageSize < 1) {
        throw new Error("page size must be positive");
    }
    return Math.ceil(total / pageSize);
}
export function clampPage(page, total, pageSize) {
    const pages = pageCount(total, pageSize);
    if (pages === 0) {
        return 0;
    }
    return Math.min(Math.max(page, 0), pages - 1);
}
export function pageLabel(page, total, pageSize) {
    const pages = pageCount(total, pageSize);
    return pages === 0 ? "0 / 0" : `${page + 1} / ${pages}`;
}
