"""Pixel-neighborhood filters: mean shift smoothing, Gaussian blur,
global (Otsu) thresholding and adaptive Gaussian thresholding.

All filters are pure functions over immutable images and are bit-for-bit
deterministic; the per-pixel kernels accumulate in a fixed scan order so
that row-parallel callers always reproduce the sequential result.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numba import njit

from .raster import BinaryMask, GrayImage, RgbImage, quantize_u8


class DegenerateHistogramError(ValueError):
    """Single-valued image: every threshold yields zero between-class variance."""


@dataclass(frozen=True)
class MeanShiftParams:
    """Joint spatial-color smoothing parameters.

    The spatial window is the square |dx| <= spatial_radius, |dy| <= spatial_radius
    centered at each pixel; only colors within color_radius (Euclidean RGB
    distance) of the running estimate contribute to each mean.
    """

    spatial_radius: int = 10
    color_radius: float = 20.0
    max_iterations: int = 5
    convergence_eps: float = 1.0

    def __post_init__(self):
        if self.spatial_radius <= 0 or self.color_radius <= 0:
            raise ValueError("mean shift radii must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class AdaptiveParams:
    """Adaptive Gaussian threshold parameters.

    The per-pixel threshold is the Gaussian-weighted neighborhood mean
    (block_size x block_size, borders replicated) quantized to the 8-bit
    grid, minus the signed constant c. Polarity "darker" marks pixels
    strictly below the threshold as foreground, "brighter" strictly above.
    """

    block_size: int = 77
    c: int = 0
    polarity: Literal["darker", "brighter"] = "darker"

    def __post_init__(self):
        if self.block_size < 3 or self.block_size % 2 == 0:
            raise ValueError("block_size must be odd and >= 3")
        if self.polarity not in ("darker", "brighter"):
            raise ValueError(f"unknown polarity {self.polarity!r}")


@njit(cache=True)
def _mean_shift_core(src, radius, color_r2, eps2, max_iter, out):
    h, w = src.shape[0], src.shape[1]
    for y in range(h):
        y_lo = y - radius if y - radius > 0 else 0
        y_hi = y + radius if y + radius < h - 1 else h - 1
        for x in range(w):
            x_lo = x - radius if x - radius > 0 else 0
            x_hi = x + radius if x + radius < w - 1 else w - 1
            c0 = src[y, x, 0]
            c1 = src[y, x, 1]
            c2 = src[y, x, 2]
            for _ in range(max_iter):
                s0 = 0.0
                s1 = 0.0
                s2 = 0.0
                n = 0
                for yy in range(y_lo, y_hi + 1):
                    for xx in range(x_lo, x_hi + 1):
                        d0 = src[yy, xx, 0] - c0
                        d1 = src[yy, xx, 1] - c1
                        d2 = src[yy, xx, 2] - c2
                        if d0 * d0 + d1 * d1 + d2 * d2 <= color_r2:
                            s0 += src[yy, xx, 0]
                            s1 += src[yy, xx, 1]
                            s2 += src[yy, xx, 2]
                            n += 1
                # n >= 1: the running mean always stays within color_radius
                # of at least one contributing sample
                m0 = s0 / n
                m1 = s1 / n
                m2 = s2 / n
                shift2 = (m0 - c0) ** 2 + (m1 - c1) ** 2 + (m2 - c2) ** 2
                c0 = m0
                c1 = m1
                c2 = m2
                if shift2 < eps2:
                    break
            out[y, x, 0] = c0
            out[y, x, 1] = c1
            out[y, x, 2] = c2


def mean_shift_filter(img: RgbImage, p: MeanShiftParams) -> RgbImage:
    """Flatten color texture by iterating the joint spatial-range mean per pixel.

    Each pixel's color estimate is refined until the shift drops below
    convergence_eps or max_iterations is hit; the converged color is written
    out. Regions separated by more than color_radius never mix.
    """
    src = img.pixels.astype(np.float64)
    out = np.empty_like(src)
    _mean_shift_core(
        src,
        int(p.spatial_radius),
        float(p.color_radius) ** 2,
        float(p.convergence_eps) ** 2,
        int(p.max_iterations),
        out,
    )
    return RgbImage(quantize_u8(out))


def gaussian_sigma_for_kernel(kernel_size: int) -> float:
    """Conventional sigma for a given odd kernel size."""
    return 0.3 * ((kernel_size - 1) * 0.5 - 1.0) + 0.8


def gaussian_kernel_1d(kernel_size: int, sigma: float) -> np.ndarray:
    """Symmetric 1-D Gaussian taps normalized to sum 1."""
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise ValueError("kernel_size must be odd and >= 3")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    half = kernel_size // 2
    xs = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def _convolve_separable(a: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Separable correlation with edge replication, float64 throughout."""
    half = len(k) // 2
    # vertical pass
    padded = np.pad(a, [(half, half)] + [(0, 0)] * (a.ndim - 1), mode="edge")
    v = np.zeros_like(a, dtype=np.float64)
    for i in range(len(k)):
        v += k[i] * padded[i : i + a.shape[0]]
    # horizontal pass
    padded = np.pad(v, [(0, 0), (half, half)] + [(0, 0)] * (a.ndim - 2), mode="edge")
    out = np.zeros_like(v)
    for i in range(len(k)):
        out += k[i] * padded[:, i : i + a.shape[1]]
    return out


def gaussian_blur_array(a: np.ndarray, kernel_size: int, sigma: float) -> np.ndarray:
    """Float-precision Gaussian blur of a raw array (kernel sums to 1, edges replicated)."""
    k = gaussian_kernel_1d(kernel_size, sigma)
    return _convolve_separable(np.asarray(a, dtype=np.float64), k)


def gaussian_blur(img: RgbImage | GrayImage, kernel_size: int, sigma: float | None = None) -> RgbImage | GrayImage:
    """Blur an image with a normalized separable Gaussian; same kind out as in.

    sigma defaults to the conventional size-derived value.
    """
    if sigma is None:
        sigma = gaussian_sigma_for_kernel(kernel_size)
    blurred = gaussian_blur_array(img.pixels, kernel_size, sigma)
    if isinstance(img, RgbImage):
        return RgbImage(quantize_u8(blurred))
    return GrayImage(quantize_u8(blurred))


def otsu_threshold(img: GrayImage) -> int:
    """Threshold maximizing between-class variance of the 256-bin histogram.

    Classes are {pixel <= t} and {pixel > t}; ties resolve to the smallest t.
    Raises DegenerateHistogramError when the image holds a single gray value,
    so callers can fall back to a fixed level.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    if np.count_nonzero(hist) <= 1:
        raise DegenerateHistogramError("image holds a single gray value")
    total = hist.sum()
    values = np.arange(256, dtype=np.float64)
    cum_n = np.cumsum(hist)
    cum_v = np.cumsum(hist * values)
    w0 = cum_n[:-1]
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    mu0 = np.divide(cum_v[:-1], w0, out=np.zeros(255), where=valid)
    mu1 = np.divide(cum_v[-1] - cum_v[:-1], w1, out=np.zeros(255), where=valid)
    between = np.where(valid, w0 * w1 * (mu0 - mu1) ** 2, -1.0)
    return int(np.argmax(between))


def binarize(img: GrayImage, level: int) -> BinaryMask:
    """Mark pixels strictly above the level as foreground."""
    return BinaryMask(img.pixels > level)


def adaptive_gaussian_kernel_1d(block_size: int) -> np.ndarray:
    """Unnormalized 1-D taps used by the adaptive threshold (size-derived sigma)."""
    sigma = gaussian_sigma_for_kernel(block_size)
    half = block_size // 2
    xs = np.arange(-half, half + 1, dtype=np.float64)
    return np.exp(-(xs * xs) / (2.0 * sigma * sigma))


@njit(cache=True)
def _adaptive_mean_core(gray, k1d, t_out):
    h, w = gray.shape
    block = k1d.shape[0]
    half = block // 2
    # total kernel mass, accumulated in the same scan order as the per-pixel sums
    mass = 0.0
    for i in range(block):
        for j in range(block):
            mass += k1d[i] * k1d[j]
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(block):
                yy = y + i - half
                if yy < 0:
                    yy = 0
                elif yy > h - 1:
                    yy = h - 1
                for j in range(block):
                    xx = x + j - half
                    if xx < 0:
                        xx = 0
                    elif xx > w - 1:
                        xx = w - 1
                    acc += k1d[i] * k1d[j] * gray[yy, xx]
            t = acc / mass
            t_out[y, x] = int(np.floor(t + 0.5))


def adaptive_threshold_gaussian(img: GrayImage, p: AdaptiveParams) -> BinaryMask:
    """Per-pixel threshold = quantized Gaussian-weighted neighborhood mean minus c.

    Borders are replicated, comparisons are strict, and the weighted mean is
    quantized onto the 8-bit grid before c is subtracted so constant regions
    threshold exactly at their own value.
    """
    k1d = adaptive_gaussian_kernel_1d(p.block_size)
    t = np.empty(img.pixels.shape, dtype=np.int64)
    _adaptive_mean_core(img.pixels.astype(np.float64), k1d, t)
    level = t - int(p.c)
    if p.polarity == "darker":
        fg = img.pixels.astype(np.int64) < level
    else:
        fg = img.pixels.astype(np.int64) > level
    return BinaryMask(fg)
