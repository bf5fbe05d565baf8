"""Texture descriptors for gray object crops: blocked gradient-orientation
histograms (HOG) and multiresolution rotation-invariant uniform local binary
patterns (LBP, riu2 coding).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import GrayImage


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    kind: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("feature vector must be a non-empty 1-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature vector holds non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def dimension(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class HogParams:
    bins: int = 9  # unsigned orientations over [0, 180)
    cell: int = 8  # pixels per cell side
    block: int = 2  # cells per block side
    block_stride: int = 1  # cells
    clip: float = 0.2

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("need at least 2 orientation bins")
        if self.cell < 1 or self.block < 1 or self.block_stride < 1:
            raise ValueError("cell/block geometry must be positive")
        if not 0 < self.clip <= 1:
            raise ValueError("clip must lie in (0, 1]")


@dataclass(frozen=True)
class LbpParams:
    rings: tuple[tuple[int, int], ...] = ((8, 1), (16, 2))  # (samples, radius)

    def __post_init__(self):
        rings = tuple((int(p), int(r)) for p, r in self.rings)
        for p, r in rings:
            if p < 4:
                raise ValueError("each ring needs at least 4 samples")
            if r < 1:
                raise ValueError("ring radius must be >= 1")
        object.__setattr__(self, "rings", rings)


def hog_dimension(width: int, height: int, p: HogParams) -> int:
    cx = width // p.cell
    cy = height // p.cell
    bx = (cx - p.block) // p.block_stride + 1
    by = (cy - p.block) // p.block_stride + 1
    return by * bx * p.block * p.block * p.bins


def hog(img: GrayImage, p: HogParams = HogParams()) -> FeatureVector:
    """Cell/block gradient-orientation descriptor with L2-Hys normalization.

    Central-difference gradients (zero at image borders), magnitude votes
    split linearly between the two nearest orientation bins, per-block L2
    normalization, clipping at p.clip, then renormalization. Blocks whose
    histogram is all zero stay zero. Blocks concatenate in raster order.
    """
    cy = img.height // p.cell
    cx = img.width // p.cell
    if cy < 2 or cx < 2:
        raise ValueError(f"image {img.width}x{img.height} is smaller than 2x2 cells of {p.cell} px")

    h, w = cy * p.cell, cx * p.cell
    a = img.pixels[:h, :w].astype(np.float64)
    gx = np.zeros_like(a)
    gy = np.zeros_like(a)
    gx[:, 1:-1] = a[:, 2:] - a[:, :-2]
    gy[1:-1, :] = a[2:, :] - a[:-2, :]
    mag = np.hypot(gx, gy)
    ang = np.degrees(np.arctan2(gy, gx)) % 180.0

    # linear orientation vote between neighbor bins centered at i * (180/bins)
    scaled = ang / (180.0 / p.bins)
    lo = np.floor(scaled).astype(np.int64) % p.bins
    frac = scaled - np.floor(scaled)
    hi = (lo + 1) % p.bins

    ys, xs = np.mgrid[0:h, 0:w]
    cell_index = (ys // p.cell) * cx + (xs // p.cell)
    hist = np.zeros(cy * cx * p.bins, dtype=np.float64)
    np.add.at(hist, cell_index.ravel() * p.bins + lo.ravel(), (mag * (1.0 - frac)).ravel())
    np.add.at(hist, cell_index.ravel() * p.bins + hi.ravel(), (mag * frac).ravel())
    hist = hist.reshape(cy, cx, p.bins)

    blocks = []
    for by in range(0, cy - p.block + 1, p.block_stride):
        for bx in range(0, cx - p.block + 1, p.block_stride):
            v = hist[by : by + p.block, bx : bx + p.block].ravel().copy()
            n = math.sqrt(float(v @ v))
            if n > 0:
                v /= n
                np.minimum(v, p.clip, out=v)
                n2 = math.sqrt(float(v @ v))
                if n2 > 0:
                    v /= n2
            blocks.append(v)
    return FeatureVector(np.concatenate(blocks), "hog")


def _ring_offsets(samples: int, radius: int) -> list[tuple[float, float]]:
    """Sampling offsets; multiples of 4 samples are built from one quadrant and
    exact 90-degree rotations so the set is bitwise closed under quarter turns."""
    if samples % 4 == 0:
        quarter = samples // 4
        base = []
        for k in range(quarter):
            theta = 2.0 * math.pi * k / samples
            base.append((radius * math.cos(theta), radius * math.sin(theta)))
        offsets = []
        for _ in range(4):
            offsets.extend(base)
            base = [(-y, x) for x, y in base]
        return offsets
    return [
        (radius * math.cos(2.0 * math.pi * k / samples), radius * math.sin(2.0 * math.pi * k / samples))
        for k in range(samples)
    ]


def _sample_tables(samples: int, radius: int) -> tuple[np.ndarray, np.ndarray]:
    """Corner offsets (samples, 4, 2) as (dx, dy) and bit-decision tables (samples, 16).

    Each sampled comparison is the bilinear interpolation of the four grid
    comparison outcomes around the sample point; the decision is whether the
    agreeing corners carry at least half the interpolation mass. Comparing
    only grid values keeps codes exactly invariant under any strictly
    monotone gray remapping.
    """
    corners = np.zeros((samples, 4, 2), dtype=np.int64)
    tables = np.zeros((samples, 16), dtype=np.uint8)
    for k, (ox, oy) in enumerate(_ring_offsets(samples, radius)):
        x0 = math.floor(ox)
        y0 = math.floor(oy)
        fx = (ox - x0) + 0.0
        fy = (oy - y0) + 0.0
        x1 = x0 + 1 if fx > 0 else x0
        y1 = y0 + 1 if fy > 0 else y0
        gxw = 1.0 - fx
        gyw = 1.0 - fy
        weights = (gxw * gyw, fx * gyw, gxw * fy, fx * fy)
        corners[k] = [(x0, y0), (x1, y0), (x0, y1), (x1, y1)]
        for pattern in range(16):
            sel = sorted((weights[i] for i in range(4) if pattern >> i & 1), reverse=True)
            unsel = sorted((weights[i] for i in range(4) if not pattern >> i & 1), reverse=True)
            tables[k, pattern] = 1 if sum(sel) >= sum(unsel) else 0
    return corners, tables


def _ring_histogram(a: np.ndarray, samples: int, radius: int) -> np.ndarray:
    """L1-normalized riu2 histogram (samples + 2 bins) over the ring's valid interior."""
    h, w = a.shape
    if h <= 2 * radius or w <= 2 * radius:
        raise ValueError(f"image {w}x{h} too small for ring radius {radius}")
    corners, tables = _sample_tables(samples, radius)
    center = a[radius : h - radius, radius : w - radius]
    ih, iw = center.shape

    bits = np.zeros((samples, ih, iw), dtype=np.uint8)
    for k in range(samples):
        pattern = np.zeros((ih, iw), dtype=np.int64)
        for ci in range(4):
            dx, dy = int(corners[k, ci, 0]), int(corners[k, ci, 1])
            corner = a[radius + dy : radius + dy + ih, radius + dx : radius + dx + iw]
            pattern |= (corner >= center).astype(np.int64) << ci
        bits[k] = tables[k][pattern]

    transitions = np.zeros((ih, iw), dtype=np.int64)
    for k in range(samples):
        transitions += bits[k] != bits[(k + 1) % samples]
    ones = bits.sum(axis=0, dtype=np.int64)
    codes = np.where(transitions <= 2, ones, samples + 1)

    hist = np.bincount(codes.ravel(), minlength=samples + 2).astype(np.float64)
    return hist / hist.sum()


def lbp(img: GrayImage, p: LbpParams = LbpParams()) -> FeatureVector:
    """Concatenated rotation-invariant uniform LBP histograms, one per ring.

    Bits are 1 when the sampled neighborhood reads at least the center value
    (ties count as 1); each ring's histogram covers its own valid interior
    and is L1-normalized before concatenation.
    """
    a = img.pixels.astype(np.int64)
    parts = [_ring_histogram(a, samples, radius) for samples, radius in p.rings]
    return FeatureVector(np.concatenate(parts), "lbp")


def lbp_dimension(p: LbpParams = LbpParams()) -> int:
    return sum(samples + 2 for samples, _ in p.rings)
