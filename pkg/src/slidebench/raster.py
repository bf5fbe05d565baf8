"""Core image containers and color-space conversions.

Every image type wraps a read-only numpy array. Public coordinates are
(x, y) = (column, row) while the backing arrays are indexed [row, column].
Images never mutate after construction, so they are safe to share across
worker threads or processes.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as _PilImage

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class RasterError(ValueError):
    """Raised for malformed image data or unsupported raster files."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def quantize_u8(a: np.ndarray) -> np.ndarray:
    """Round half up and clamp a float array onto the 8-bit grid."""
    return np.clip(np.floor(a + 0.5), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class RgbImage:
    """8-bit three-channel image, channel order R,G,B."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise RasterError(f"RgbImage expects (h, w, 3) uint8 samples, got {p.shape} {p.dtype}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise RasterError("image must be at least 1x1")
        object.__setattr__(self, "pixels", _frozen(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class GrayImage:
    """8-bit single-channel image."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 2 or p.dtype != np.uint8:
            raise RasterError(f"GrayImage expects (h, w) uint8 samples, got {p.shape} {p.dtype}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise RasterError("image must be at least 1x1")
        object.__setattr__(self, "pixels", _frozen(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class HsvImage:
    """Real-valued HSV image: hue in degrees [0, 360), saturation and value in [0, 1].

    Stored as an (h, w, 3) float64 array rather than any 8-bit packing.
    """

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=np.float64)
        if p.ndim != 3 or p.shape[2] != 3:
            raise RasterError(f"HsvImage expects (h, w, 3) reals, got {p.shape}")
        h, s, v = p[..., 0], p[..., 1], p[..., 2]
        if np.any(h < 0) or np.any(h >= 360):
            raise RasterError("hue must lie in [0, 360)")
        if np.any(s < 0) or np.any(s > 1) or np.any(v < 0) or np.any(v > 1):
            raise RasterError("saturation and value must lie in [0, 1]")
        object.__setattr__(self, "pixels", _frozen(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BinaryMask:
    """Boolean mask; True marks foreground. Serializes as 0/255 single-channel PNG."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 2 or p.dtype != np.bool_:
            raise RasterError(f"BinaryMask expects (h, w) booleans, got {p.shape} {p.dtype}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise RasterError("mask must be at least 1x1")
        object.__setattr__(self, "pixels", _frozen(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def area(self) -> int:
        return int(np.count_nonzero(self.pixels))


def rgb_to_gray(img: RgbImage) -> GrayImage:
    """Convert to gray with BT.601 luma weights, rounding half up."""
    p = img.pixels.astype(np.float64)
    luma = p[..., 0] * LUMA_WEIGHTS[0] + p[..., 1] * LUMA_WEIGHTS[1] + p[..., 2] * LUMA_WEIGHTS[2]
    return GrayImage(quantize_u8(luma))


def rgb_to_hsv(img: RgbImage) -> HsvImage:
    """Standard hexcone HSV conversion; achromatic pixels get hue 0 and saturation 0."""
    p = img.pixels.astype(np.float64) / 255.0
    r, g, b = p[..., 0], p[..., 1], p[..., 2]
    mx = np.max(p, axis=-1)
    mn = np.min(p, axis=-1)
    delta = mx - mn

    sat = np.zeros_like(mx)
    np.divide(delta, mx, out=sat, where=mx > 0)

    hue = np.zeros_like(mx)
    chroma = delta > 0
    safe = np.where(chroma, delta, 1.0)
    r_max = chroma & (mx == r)
    g_max = chroma & (mx == g) & ~r_max
    b_max = chroma & ~r_max & ~g_max
    hue = np.where(r_max, (60.0 * ((g - b) / safe)) % 360.0, hue)
    hue = np.where(g_max, 60.0 * ((b - r) / safe + 2.0), hue)
    hue = np.where(b_max, 60.0 * ((r - g) / safe + 4.0), hue)

    out = np.stack([hue, sat, mx], axis=-1)
    return HsvImage(out)


def hsv_to_rgb(img: HsvImage) -> RgbImage:
    """Inverse hexcone conversion back onto the 8-bit grid."""
    h = img.pixels[..., 0] / 60.0
    s = img.pixels[..., 1]
    v = img.pixels[..., 2]
    c = v * s
    x = c * (1.0 - np.abs(np.mod(h, 2.0) - 1.0))
    m = v - c

    sector = np.floor(h).astype(np.int64) % 6
    zeros = np.zeros_like(c)
    r = np.choose(sector, [c, x, zeros, zeros, x, c])
    g = np.choose(sector, [x, c, c, x, zeros, zeros])
    b = np.choose(sector, [zeros, zeros, x, c, c, x])

    rgb = np.stack([r + m, g + m, b + m], axis=-1) * 255.0
    return RgbImage(quantize_u8(rgb))


def hsv_value_channel(img: HsvImage) -> GrayImage:
    """Brightness (V) channel rescaled onto the 8-bit grid."""
    return GrayImage(quantize_u8(img.pixels[..., 2] * 255.0))


def invert_gray(img: GrayImage) -> GrayImage:
    return GrayImage((255 - img.pixels.astype(np.int16)).astype(np.uint8))


def read_image(path: str | Path) -> RgbImage:
    """Decode an 8-bit PNG (or JPEG) file as RGB."""
    try:
        with _PilImage.open(path) as im:
            return RgbImage(np.asarray(im.convert("RGB"), dtype=np.uint8))
    except FileNotFoundError:
        raise
    except Exception as exc:  # Pillow raises a zoo of decode errors
        raise RasterError(f"cannot decode image {path}: {exc}") from exc


def read_mask(path: str | Path) -> BinaryMask:
    """Decode a single-channel mask PNG; any nonzero sample is foreground."""
    with _PilImage.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.uint8)
    return BinaryMask(arr > 0)


def write_image(img: RgbImage | GrayImage | BinaryMask, path: str | Path) -> None:
    """Encode as 8-bit PNG. Masks are written with 0 = background, 255 = foreground."""
    path = Path(path)
    if isinstance(img, RgbImage):
        pil = _PilImage.fromarray(img.pixels, mode="RGB")
    elif isinstance(img, GrayImage):
        pil = _PilImage.fromarray(img.pixels, mode="L")
    elif isinstance(img, BinaryMask):
        pil = _PilImage.fromarray(np.where(img.pixels, 255, 0).astype(np.uint8), mode="L")
    else:
        raise RasterError(f"cannot serialize {type(img).__name__}")
    pil.save(path, format="PNG")
