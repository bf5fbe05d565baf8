"""Two-stage segmentation pipeline for bright-field slide scenes.

Stage one cleans the scene and highlights foreground objects: mean shift
smoothing, global thresholding, small-component removal, contour overlay,
and a blurred-background composite. Stage two segments the composite:
global threshold in the chosen gray channel, closing + dilation, hole
filling, an area gate, then a per-candidate refinement pass (mean shift,
adaptive threshold, hole fill, iterated dilation) that produces the final
object masks. Every stage is deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .filters import (
    AdaptiveParams,
    DegenerateHistogramError,
    MeanShiftParams,
    adaptive_threshold_gaussian,
    binarize,
    gaussian_blur,
    mean_shift_filter,
    otsu_threshold,
)
from .morphology import (
    ComponentStats,
    connected_components,
    draw_contours,
    extract_contours,
    fill_holes,
    filter_components_by_area,
    morph,
)
from .raster import (
    BinaryMask,
    GrayImage,
    HsvImage,
    RgbImage,
    hsv_value_channel,
    invert_gray,
    quantize_u8,
    rgb_to_gray,
    rgb_to_hsv,
    write_image,
)


class ImageTooSmallError(ValueError):
    """Input smaller than the object crop window."""


@dataclass(frozen=True)
class PipelineConfig:
    """Every pipeline constant in one place.

    objects_darker reflects stained material on a bright background: global
    thresholds run on the inverted gray channel so foreground means "object".
    gray_source picks the channel thresholded during segmentation: the HSV
    brightness channel (default) or plain luma.
    """

    mean_shift: MeanShiftParams = MeanShiftParams()
    otsu_fallback: int = 127
    min_area_pre: int = 500
    blur_kernel: int = 11
    contour_color: tuple[int, int, int] = (255, 255, 0)
    morph_kernel: int = 3
    min_area_seg: int = 100
    adaptive: AdaptiveParams = AdaptiveParams(block_size=77, c=0, polarity="darker")
    min_area_refine: int = 150
    dilate_iterations: int = 5
    crop_size: int = 84
    background_color: tuple[int, int, int] = (0, 255, 0)
    gray_source: str = "hsv_value"  # or "luma"
    objects_darker: bool = True
    refine_margin: int = 10  # bbox expansion for the per-candidate refinement

    def __post_init__(self):
        if self.gray_source not in ("hsv_value", "luma"):
            raise ValueError(f"unknown gray_source {self.gray_source!r}")
        for name in ("min_area_pre", "min_area_seg", "min_area_refine"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("blur_kernel", "morph_kernel"):
            v = getattr(self, name)
            if v < 3 or v % 2 == 0:
                raise ValueError(f"{name} must be odd and >= 3")
        if not 0 <= self.otsu_fallback <= 255:
            raise ValueError("otsu_fallback must be an 8-bit level")
        if self.crop_size < 1 or self.dilate_iterations < 1 or self.refine_margin < 0:
            raise ValueError("bad crop/dilate/margin settings")


@dataclass(frozen=True)
class ObjectCandidate:
    """One refined object: full-image mask holding exactly one component."""

    mask: BinaryMask
    stats: ComponentStats


@dataclass(frozen=True)
class SegmentedObject:
    object_id: str
    source: str
    bbox: tuple[int, int, int, int]
    centroid: tuple[float, float]
    crop: RgbImage
    mask: BinaryMask
    green_crop: RgbImage
    crop_origin: tuple[int, int] = (0, 0)  # (x, y) of the window in the scene
    oversize: bool = False


@dataclass
class PipelineTrace:
    """Optional intermediate rasters keyed by stage letters a..h."""

    enabled: bool = False
    stages: dict = field(default_factory=dict)

    def record(self, key: str, raster) -> None:
        if self.enabled:
            self.stages[key] = raster

    def write(self, out_dir: str | Path, image_id: str) -> list[Path]:
        """Dump recorded stages as <image>_<stage>.png for visual audit."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for key in sorted(self.stages):
            path = out_dir / f"{image_id}_{key}.png"
            raster = self.stages[key]
            if isinstance(raster, HsvImage):
                raster = GrayImage(quantize_u8(raster.pixels[..., 2] * 255.0))
            write_image(raster, path)
            written.append(path)
        return written


def _threshold_gray(gray: GrayImage, cfg: PipelineConfig) -> BinaryMask:
    """Global Otsu threshold with the configured fallback; inverted gray when
    objects are darker than the background so foreground means object."""
    work = invert_gray(gray) if cfg.objects_darker else gray
    try:
        level = otsu_threshold(work)
    except DegenerateHistogramError:
        level = cfg.otsu_fallback
    return binarize(work, level)


def preprocess(img: RgbImage, cfg: PipelineConfig, trace: bool = False) -> tuple[RgbImage, PipelineTrace]:
    """Highlight foreground objects against a blurred background.

    mean shift -> gray -> global threshold -> area gate -> masked input with
    contours drawn -> composite of sharp foreground over Gaussian-blurred
    background.
    """
    if img.width < cfg.crop_size or img.height < cfg.crop_size:
        raise ImageTooSmallError(
            f"image {img.width}x{img.height} is smaller than the {cfg.crop_size} px crop window"
        )
    tr = PipelineTrace(enabled=trace)
    tr.record("a", img)

    smooth = mean_shift_filter(img, cfg.mean_shift)
    tr.record("b", smooth)

    mask = _threshold_gray(rgb_to_gray(smooth), cfg)
    mask = filter_components_by_area(mask, cfg.min_area_pre, 8)

    masked = np.where(mask.pixels[..., None], img.pixels, 0).astype(np.uint8)
    contours = [c for c, _ in extract_contours(mask)]
    highlighted = draw_contours(RgbImage(masked), contours, cfg.contour_color)

    blurred = gaussian_blur(img, cfg.blur_kernel)
    composite = np.where(mask.pixels[..., None], highlighted.pixels, blurred.pixels).astype(np.uint8)
    out = RgbImage(composite)
    tr.record("c", out)
    return out, tr


def _clamp_window(lo: int, size: int, limit: int) -> int:
    return max(0, min(lo, limit - size))


def segment(pre: RgbImage, cfg: PipelineConfig, trace: PipelineTrace | None = None) -> list[ObjectCandidate]:
    """Segment a preprocessed scene into refined object candidates."""
    tr = trace if trace is not None else PipelineTrace()

    hsv = rgb_to_hsv(pre)
    tr.record("d", hsv)
    if cfg.gray_source == "hsv_value":
        gray = hsv_value_channel(hsv)
    else:
        gray = rgb_to_gray(pre)

    mask = _threshold_gray(gray, cfg)
    mask = morph(mask, "close", cfg.morph_kernel, 1)
    mask = morph(mask, "dilate", cfg.morph_kernel, 1)
    mask = fill_holes(mask)
    tr.record("e", mask)
    mask = filter_components_by_area(mask, cfg.min_area_seg, 8)

    contours = extract_contours(mask)
    if tr.enabled:
        tr.record("f", draw_contours(pre, [c for c, _ in contours], cfg.contour_color))

    h, w = pre.height, pre.width
    refined = np.zeros((h, w), dtype=bool)
    for _, st in contours:
        x0 = max(0, st.bbox[0] - cfg.refine_margin)
        y0 = max(0, st.bbox[1] - cfg.refine_margin)
        x1 = min(w - 1, st.bbox[2] + cfg.refine_margin)
        y1 = min(h - 1, st.bbox[3] + cfg.refine_margin)
        region = RgbImage(pre.pixels[y0 : y1 + 1, x0 : x1 + 1])
        sub = mean_shift_filter(region, cfg.mean_shift)
        sub_mask = adaptive_threshold_gaussian(rgb_to_gray(sub), cfg.adaptive)
        sub_mask = filter_components_by_area(sub_mask, cfg.min_area_refine, 8)
        sub_mask = fill_holes(sub_mask)
        sub_mask = morph(sub_mask, "dilate", cfg.morph_kernel, cfg.dilate_iterations)
        refined[y0 : y1 + 1, x0 : x1 + 1] |= sub_mask.pixels
    tr.record("g", BinaryMask(refined.copy()))

    labels, stats = connected_components(BinaryMask(refined), 8)
    candidates = []
    for st in stats:
        candidates.append(
            ObjectCandidate(mask=BinaryMask(labels == st.label), stats=st)
        )
    return candidates


def extract_object(
    src: RgbImage, cand: ObjectCandidate, cfg: PipelineConfig, object_id: str = "object", source: str = "image"
) -> SegmentedObject:
    """Cut the crop/mask/green triplet around the candidate's centroid.

    The window is crop_size squared, centered at the rounded centroid and
    shifted (never padded) to stay inside the image. Objects wider than the
    window are kept but flagged oversize with a clipped mask.
    """
    size = cfg.crop_size
    cx = int(np.floor(cand.stats.centroid[0] + 0.5))
    cy = int(np.floor(cand.stats.centroid[1] + 0.5))
    x0 = _clamp_window(cx - size // 2, size, src.width)
    y0 = _clamp_window(cy - size // 2, size, src.height)

    crop = RgbImage(src.pixels[y0 : y0 + size, x0 : x0 + size])
    mask = BinaryMask(cand.mask.pixels[y0 : y0 + size, x0 : x0 + size])
    bg = np.empty_like(crop.pixels)
    bg[:] = cfg.background_color
    green = RgbImage(np.where(mask.pixels[..., None], crop.pixels, bg).astype(np.uint8))

    bw = cand.stats.bbox[2] - cand.stats.bbox[0] + 1
    bh = cand.stats.bbox[3] - cand.stats.bbox[1] + 1
    return SegmentedObject(
        object_id=object_id,
        source=source,
        bbox=cand.stats.bbox,
        centroid=cand.stats.centroid,
        crop=crop,
        mask=mask,
        green_crop=green,
        crop_origin=(x0, y0),
        oversize=bw > size or bh > size,
    )


def run_pipeline(
    img: RgbImage, cfg: PipelineConfig, source: str = "image", trace: bool = False
) -> tuple[list[SegmentedObject], PipelineTrace]:
    """preprocess -> segment -> extract, with deterministic object ids."""
    pre, tr = preprocess(img, cfg, trace=trace)
    candidates = segment(pre, cfg, trace=tr)
    objects = []
    for i, cand in enumerate(candidates):
        objects.append(
            extract_object(img, cand, cfg, object_id=f"{source}-{i:04d}", source=source)
        )
    if tr.enabled and objects:
        strip_mask = np.concatenate([o.mask.pixels for o in objects], axis=1)
        strip_green = np.concatenate([o.green_crop.pixels for o in objects], axis=1)
        tr.record("h", RgbImage(np.concatenate(
            [np.repeat(np.where(strip_mask, 255, 0).astype(np.uint8)[..., None], 3, axis=2), strip_green],
            axis=0,
        )))
    return objects, tr
