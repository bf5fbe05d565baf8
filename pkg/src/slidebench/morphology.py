"""Binary-mask machinery: connected components, area filtering, flood fill,
closing/dilation/erosion, outer contours and centroids.

Coordinates follow the package convention: points are (x, y) = (column, row),
bounding boxes are inclusive (min_x, min_y, max_x, max_y). Component labels
are assigned 1..K in raster-scan order of each component's first pixel.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numba import njit

from .raster import BinaryMask, RgbImage


@dataclass(frozen=True)
class ComponentStats:
    label: int
    area: int
    bbox: tuple[int, int, int, int]
    centroid: tuple[float, float]


@dataclass(frozen=True)
class Contour:
    """Ordered outer boundary of a component; consecutive points are 8-adjacent
    and the walk is closed for components of area >= 2."""

    points: np.ndarray  # (n, 2) int64, columns are (x, y)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.int64)
        if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 1:
            raise ValueError("contour needs at least one (x, y) point")
        object.__setattr__(self, "points", p)

    def __len__(self) -> int:
        return self.points.shape[0]


@njit(cache=True)
def _find_root(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    # path compression
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True)
def _label_core(mask, eight_connected):
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    parent = np.zeros(h * w // 2 + 2, dtype=np.int32)
    next_label = 1
    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            best = 0
            # already-visited neighbors: W, NW, N, NE (NW/NE only for 8-conn)
            if x > 0 and labels[y, x - 1] > 0:
                r = _find_root(parent, labels[y, x - 1])
                if best == 0 or r < best:
                    best = r
            if y > 0:
                if labels[y - 1, x] > 0:
                    r = _find_root(parent, labels[y - 1, x])
                    if best == 0 or r < best:
                        best = r
                if eight_connected:
                    if x > 0 and labels[y - 1, x - 1] > 0:
                        r = _find_root(parent, labels[y - 1, x - 1])
                        if best == 0 or r < best:
                            best = r
                    if x < w - 1 and labels[y - 1, x + 1] > 0:
                        r = _find_root(parent, labels[y - 1, x + 1])
                        if best == 0 or r < best:
                            best = r
            if best == 0:
                parent[next_label] = next_label
                labels[y, x] = next_label
                next_label += 1
            else:
                labels[y, x] = best
                # union every distinct neighbor root into best
                if x > 0 and labels[y, x - 1] > 0:
                    parent[_find_root(parent, labels[y, x - 1])] = best
                if y > 0:
                    if labels[y - 1, x] > 0:
                        parent[_find_root(parent, labels[y - 1, x])] = best
                    if eight_connected:
                        if x > 0 and labels[y - 1, x - 1] > 0:
                            parent[_find_root(parent, labels[y - 1, x - 1])] = best
                        if x < w - 1 and labels[y - 1, x + 1] > 0:
                            parent[_find_root(parent, labels[y - 1, x + 1])] = best
    # second pass: renumber roots by first raster occurrence
    remap = np.zeros(next_label, dtype=np.int32)
    count = 0
    for y in range(h):
        for x in range(w):
            if labels[y, x] > 0:
                root = _find_root(parent, labels[y, x])
                if remap[root] == 0:
                    count += 1
                    remap[root] = count
                labels[y, x] = remap[root]
    return labels, count


def label_map(mask: BinaryMask, connectivity: Literal[4, 8] = 8) -> tuple[np.ndarray, int]:
    """Label map (0 = background) and component count."""
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    return _label_core(mask.pixels, connectivity == 8)


def _stats_from_labels(labels: np.ndarray, count: int) -> list[ComponentStats]:
    if count == 0:
        return []
    ys, xs = np.nonzero(labels)
    ids = labels[ys, xs]
    areas = np.bincount(ids, minlength=count + 1)
    sum_x = np.bincount(ids, weights=xs, minlength=count + 1)
    sum_y = np.bincount(ids, weights=ys, minlength=count + 1)
    min_x = np.full(count + 1, np.iinfo(np.int64).max)
    min_y = np.full(count + 1, np.iinfo(np.int64).max)
    max_x = np.full(count + 1, -1)
    max_y = np.full(count + 1, -1)
    np.minimum.at(min_x, ids, xs)
    np.minimum.at(min_y, ids, ys)
    np.maximum.at(max_x, ids, xs)
    np.maximum.at(max_y, ids, ys)
    stats = []
    for k in range(1, count + 1):
        stats.append(
            ComponentStats(
                label=k,
                area=int(areas[k]),
                bbox=(int(min_x[k]), int(min_y[k]), int(max_x[k]), int(max_y[k])),
                centroid=(float(sum_x[k] / areas[k]), float(sum_y[k] / areas[k])),
            )
        )
    return stats


def connected_components(
    mask: BinaryMask, connectivity: Literal[4, 8] = 8
) -> tuple[np.ndarray, list[ComponentStats]]:
    """Label foreground components and report exact area/bbox/centroid per label."""
    labels, count = label_map(mask, connectivity)
    return labels, _stats_from_labels(labels, count)


def filter_components_by_area(
    mask: BinaryMask, min_area: int, connectivity: Literal[4, 8] = 8
) -> BinaryMask:
    """Keep components whose area is >= min_area, clear the rest."""
    if min_area < 1:
        raise ValueError("min_area must be >= 1")
    labels, count = label_map(mask, connectivity)
    if count == 0:
        return mask
    areas = np.bincount(labels.ravel(), minlength=count + 1)
    keep = areas >= min_area
    keep[0] = False
    return BinaryMask(keep[labels])


def _dilate_once(m: np.ndarray, half: int) -> np.ndarray:
    size = 2 * half + 1
    p = np.pad(m, ((0, 0), (half, half)), constant_values=False)
    out = np.zeros_like(m)
    for i in range(size):
        out |= p[:, i : i + m.shape[1]]
    p = np.pad(out, ((half, half), (0, 0)), constant_values=False)
    res = np.zeros_like(m)
    for i in range(size):
        res |= p[i : i + m.shape[0], :]
    return res


def _erode_once(m: np.ndarray, half: int) -> np.ndarray:
    size = 2 * half + 1
    p = np.pad(m, ((0, 0), (half, half)), constant_values=False)
    out = np.ones_like(m)
    for i in range(size):
        out &= p[:, i : i + m.shape[1]]
    p = np.pad(out, ((half, half), (0, 0)), constant_values=False)
    res = np.ones_like(m)
    for i in range(size):
        res &= p[i : i + m.shape[0], :]
    return res


def morph(
    mask: BinaryMask,
    op: Literal["dilate", "erode", "close"],
    kernel_size: int = 3,
    iterations: int = 1,
) -> BinaryMask:
    """Set-theoretic morphology with an all-ones square kernel.

    Pixels outside the image count as background, so erosion shrinks at the
    borders. close = dilate then erode, once per iteration.
    """
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise ValueError("kernel_size must be odd and >= 3")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    half = kernel_size // 2
    m = mask.pixels.copy()
    for _ in range(iterations):
        if op == "dilate":
            m = _dilate_once(m, half)
        elif op == "erode":
            m = _erode_once(m, half)
        elif op == "close":
            m = _erode_once(_dilate_once(m, half), half)
        else:
            raise ValueError(f"unknown morphology op {op!r}")
    return BinaryMask(m)


def flood_fill(mask: BinaryMask, seed: tuple[int, int], connectivity: Literal[4, 8] = 4) -> BinaryMask:
    """Toggle the seed's connected equal-valued region to the opposite value."""
    x, y = seed
    if not (0 <= x < mask.width and 0 <= y < mask.height):
        raise ValueError(f"seed {seed} out of bounds")
    value = bool(mask.pixels[y, x])
    labels, _ = _label_core(mask.pixels == value, connectivity == 8)
    region = labels == labels[y, x]
    out = mask.pixels.copy()
    out[region] = not value
    return BinaryMask(out)


def fill_holes(mask: BinaryMask) -> BinaryMask:
    """Turn background regions not 4-connected to the image border into foreground."""
    bg = ~mask.pixels
    labels, count = _label_core(bg, False)
    if count == 0:
        return mask
    border = np.zeros(count + 1, dtype=bool)
    border[labels[0, :]] = True
    border[labels[-1, :]] = True
    border[labels[:, 0]] = True
    border[labels[:, -1]] = True
    border[0] = False
    holes = bg & ~border[labels]
    return BinaryMask(mask.pixels | holes)


# clockwise Moore neighborhood starting east, (dx, dy)
_MOORE = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_MOORE_INDEX = {d: i for i, d in enumerate(_MOORE)}


def _trace_boundary(
    labels: np.ndarray, label: int, start: tuple[int, int], area: int
) -> list[tuple[int, int]]:
    """Clockwise Moore boundary walk from the component's first raster pixel.

    The walk stops once the start pixel is re-entered and the next move would
    repeat the very first move, i.e. the cycle is about to restart.
    """
    h, w = labels.shape

    def is_fg(x: int, y: int) -> bool:
        return 0 <= x < w and 0 <= y < h and labels[y, x] == label

    # the western neighbor of the raster-first pixel never belongs to the component
    c = start
    b = (start[0] - 1, start[1])
    contour = [c]
    second: tuple[int, int] | None = None
    for _ in range(4 * area + 8):
        dir_b = _MOORE_INDEX[(b[0] - c[0], b[1] - c[1])]
        hit = -1
        prev = b
        for step in range(1, 9):
            d = (dir_b + step) % 8
            n = (c[0] + _MOORE[d][0], c[1] + _MOORE[d][1])
            if is_fg(n[0], n[1]):
                hit = d
                break
            prev = n
        if hit < 0:
            return contour  # isolated pixel
        n = (c[0] + _MOORE[hit][0], c[1] + _MOORE[hit][1])
        if second is None:
            second = n
        elif c == start and n == second:
            # drop the trailing re-entry so the walk stays closed but unclipped
            if contour[-1] == start:
                contour.pop()
            return contour
        b = prev
        c = n
        contour.append(c)
    return contour  # safety cap; unreachable for well-formed label maps


def extract_contours(mask: BinaryMask) -> list[tuple[Contour, ComponentStats]]:
    """Outer Moore boundary and stats of every 8-connected component.

    Centroids come from the full pixel set of each component, not the
    boundary alone.
    """
    labels, stats = connected_components(mask, 8)
    out = []
    for st in stats:
        # raster-first pixel: leftmost set pixel of the bbox's top row
        top = st.bbox[1]
        first_x = int(np.nonzero(labels[top] == st.label)[0][0])
        pts = _trace_boundary(labels, st.label, (first_x, top), st.area)
        out.append((Contour(np.asarray(pts, dtype=np.int64)), st))
    return out


def draw_contours(
    img: RgbImage, contours: list[Contour], color: tuple[int, int, int] = (255, 255, 0)
) -> RgbImage:
    """Overwrite boundary pixels with a solid color, leaving the rest untouched."""
    out = img.pixels.copy()
    for contour in contours:
        xs = contour.points[:, 0]
        ys = contour.points[:, 1]
        if xs.min() < 0 or ys.min() < 0 or xs.max() >= img.width or ys.max() >= img.height:
            raise ValueError("contour exceeds image bounds")
        out[ys, xs] = color
    return RgbImage(out)
