"""Seeded synthetic bright-field scenes with exact per-object ground truth.

Objects are stained dark disks with a translucent wall: the body is strongly
stained while the outer few pixels fade toward the background, the way a
grain's wall reads under bright-field optics. Distractors are bright
air-bubble rings and sub-detection dust specks. Placement is rejection
sampled so all entities stay well separated and ground-truth masks are
mutually disjoint.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..raster import BinaryMask, RgbImage, quantize_u8


class InfeasiblePackingError(ValueError):
    """Could not place all requested entities without overlap."""


BACKGROUND_COLOR = np.array([206.0, 203.0, 214.0])
OBJECT_CORE_COLOR = np.array([115.0, 52.0, 98.0])
BUBBLE_COLOR = np.array([233.0, 233.0, 240.0])
SPECK_COLOR = np.array([90.0, 70.0, 85.0])

# stained-body profile: fully stained out to R - wall_width, then a wall band
# fading to a faint outer tint that ends exactly at the nominal radius
WALL_WIDTH = 7.0
WALL_KNEE = 4.5  # distance from the rim where the faint outer band starts
WALL_KNEE_TINT = 0.965  # background fraction reached at the knee


@dataclass(frozen=True)
class SyntheticSpec:
    width: int = 1024
    height: int = 1024
    n_objects: int = 10
    radius_range: tuple[float, float] = (14.0, 28.0)
    n_bubbles: int = 6
    n_specks: int = 8
    speck_radius_range: tuple[float, float] = (1.5, 5.0)
    noise_sigma: float = 4.0
    separation: float = 30.0  # minimum edge-to-edge distance between entities
    seed: int = 0

    def __post_init__(self):
        if self.width < 16 or self.height < 16:
            raise ValueError("scene too small")
        if self.n_objects < 0 or self.n_bubbles < 0 or self.n_specks < 0:
            raise ValueError("entity counts must be non-negative")
        lo, hi = self.radius_range
        if not 0 < lo <= hi:
            raise ValueError("bad radius_range")
        if self.noise_sigma < 0 or self.separation < 0:
            raise ValueError("bad noise/separation settings")


@dataclass(frozen=True)
class GroundTruthObject:
    center: tuple[float, float]  # (x, y)
    area: int
    mask: BinaryMask


def _place(
    rng: np.random.Generator,
    placed: list[tuple[float, float, float]],
    radius: float,
    width: int,
    height: int,
    separation: float,
    margin: float,
) -> tuple[float, float]:
    for _ in range(4000):
        x = rng.uniform(margin + radius, width - margin - radius)
        y = rng.uniform(margin + radius, height - margin - radius)
        ok = True
        for px, py, pr in placed:
            if (x - px) ** 2 + (y - py) ** 2 < (radius + pr + separation) ** 2:
                ok = False
                break
        if ok:
            placed.append((x, y, radius))
            return x, y
    raise InfeasiblePackingError(
        f"no room for an entity of radius {radius:.1f} after 4000 attempts"
    )


def _stain_tint(dist: np.ndarray, radius: float) -> np.ndarray:
    """Background fraction as a function of distance from the object center.

    0 = fully stained body, 1 = background. The wall band rises steeply to a
    faint tint at the knee, then drifts to pure background at the rim.
    """
    t = np.ones_like(dist)
    body = dist <= radius - WALL_WIDTH
    wall = (dist > radius - WALL_WIDTH) & (dist <= radius - WALL_KNEE)
    outer = (dist > radius - WALL_KNEE) & (dist <= radius)
    t[body] = 0.0
    u = (dist[wall] - (radius - WALL_WIDTH)) / (WALL_WIDTH - WALL_KNEE)
    t[wall] = WALL_KNEE_TINT * u * u * (3.0 - 2.0 * u)  # smoothstep rise
    v = (dist[outer] - (radius - WALL_KNEE)) / WALL_KNEE
    t[outer] = WALL_KNEE_TINT + (1.0 - WALL_KNEE_TINT) * v
    return t


def generate_synthetic_scene(spec: SyntheticSpec) -> tuple[RgbImage, list[GroundTruthObject]]:
    """Render a scene and return it with exact ground-truth object masks.

    The same spec (and seed) always reproduces the identical image and truth.
    """
    rng = np.random.default_rng(spec.seed)
    h, w = spec.height, spec.width
    canvas = np.empty((h, w, 3), dtype=np.float64)
    canvas[:] = BACKGROUND_COLOR
    canvas += rng.normal(0.0, spec.noise_sigma, size=(h, w, 3))

    placed: list[tuple[float, float, float]] = []

    # draw order: bubbles and specks first, objects last (objects authoritative)
    bubble_radii = rng.uniform(9.0, 22.0, size=spec.n_bubbles)
    for r in bubble_radii:
        x, y = _place(rng, placed, r, w, h, spec.separation, margin=4)
        yy, xx = _disk_grid(x, y, r + 2, h, w)
        dist = np.hypot(xx - x, yy - y)
        ring = (dist >= r - 2.0) & (dist <= r)
        sl = (yy[ring], xx[ring])
        canvas[sl[0], sl[1]] = BUBBLE_COLOR + rng.normal(0, 1.5, size=(ring.sum(), 3))

    speck_radii = rng.uniform(*spec.speck_radius_range, size=spec.n_specks)
    for r in speck_radii:
        x, y = _place(rng, placed, r, w, h, spec.separation, margin=4)
        yy, xx = _disk_grid(x, y, r + 1, h, w)
        dist = np.hypot(xx - x, yy - y)
        dot = dist <= r
        canvas[yy[dot], xx[dot]] = SPECK_COLOR + rng.normal(0, 2.0, size=(int(dot.sum()), 3))

    truths: list[GroundTruthObject] = []
    radii = rng.uniform(*spec.radius_range, size=spec.n_objects)
    for r in radii:
        x, y = _place(rng, placed, r, w, h, spec.separation, margin=6)
        core = OBJECT_CORE_COLOR + rng.uniform(-12, 12, size=3)
        yy, xx = _disk_grid(x, y, r + 1, h, w)
        dist = np.hypot(xx - x, yy - y)
        inside = dist <= r
        tint = _stain_tint(dist[inside], r)[:, None]
        # mild internal texture over the stained body
        texture = rng.normal(0.0, 5.0, size=(int(inside.sum()), 1)) * (1.0 - tint)
        color = core[None, :] * (1.0 - tint) + canvas[yy[inside], xx[inside]] * tint
        canvas[yy[inside], xx[inside]] = color + texture

        mask = np.zeros((h, w), dtype=bool)
        mask[yy[inside], xx[inside]] = True
        truths.append(
            GroundTruthObject(center=(float(x), float(y)), area=int(inside.sum()), mask=BinaryMask(mask))
        )

    return RgbImage(quantize_u8(canvas)), truths


def _disk_grid(x: float, y: float, reach: float, h: int, w: int):
    y0 = max(0, int(np.floor(y - reach)))
    y1 = min(h - 1, int(np.ceil(y + reach)))
    x0 = max(0, int(np.floor(x - reach)))
    x1 = min(w - 1, int(np.ceil(x + reach)))
    return np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
