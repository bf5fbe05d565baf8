import numpy as np
import pytest

from conftest import adaptive_oracle, otsu_oracle
from slidebench.filters import (
    AdaptiveParams,
    DegenerateHistogramError,
    MeanShiftParams,
    adaptive_threshold_gaussian,
    binarize,
    gaussian_blur,
    gaussian_blur_array,
    gaussian_kernel_1d,
    gaussian_sigma_for_kernel,
    mean_shift_filter,
    otsu_threshold,
)
from slidebench.raster import GrayImage, RgbImage


def _const_rgb(color, h=12, w=12):
    arr = np.empty((h, w, 3), dtype=np.uint8)
    arr[:] = color
    return RgbImage(arr)


class TestMeanShift:
    def test_constant_image_is_fixed_point(self):
        img = _const_rgb((90, 140, 30))
        out = mean_shift_filter(img, MeanShiftParams(spatial_radius=3, color_radius=10))
        assert np.array_equal(out.pixels, img.pixels)

    def test_single_pixel_unchanged(self):
        img = _const_rgb((1, 2, 3), h=1, w=1)
        out = mean_shift_filter(img, MeanShiftParams(spatial_radius=5, color_radius=10))
        assert np.array_equal(out.pixels, img.pixels)

    def test_distinct_half_planes_do_not_mix(self):
        # color distance between halves greatly exceeds the color radius, so
        # brute-force window evaluation finds no cross-region contribution
        arr = np.zeros((10, 20, 3), dtype=np.uint8)
        arr[:, 10:] = (200, 200, 200)
        arr[:, :10] = (40, 40, 40)
        out = mean_shift_filter(RgbImage(arr), MeanShiftParams(spatial_radius=4, color_radius=30))
        assert np.array_equal(out.pixels, arr)

    def test_output_within_color_radius_of_some_window_color(self, rng):
        arr = rng.integers(0, 256, size=(24, 24, 3), dtype=np.uint8)
        p = MeanShiftParams(spatial_radius=3, color_radius=25, max_iterations=5)
        out = mean_shift_filter(RgbImage(arr), p).pixels.astype(np.float64)
        src = arr.astype(np.float64)
        r = p.spatial_radius
        for y in range(0, 24, 5):
            for x in range(0, 24, 5):
                window = src[max(0, y - r) : y + r + 1, max(0, x - r) : x + r + 1].reshape(-1, 3)
                dist = np.sqrt(((window - out[y, x]) ** 2).sum(axis=1))
                # quantization can add at most sqrt(3)/2 on top of the radius
                assert dist.min() <= p.color_radius + 1.0

    def test_smooths_noise_toward_local_mean(self, rng):
        base = np.full((30, 30, 3), 120.0)
        noisy = np.clip(base + rng.normal(0, 5, size=base.shape), 0, 255).astype(np.uint8)
        out = mean_shift_filter(RgbImage(noisy), MeanShiftParams(spatial_radius=5, color_radius=30))
        assert out.pixels.std() < noisy.std()

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError):
            MeanShiftParams(spatial_radius=0)
        with pytest.raises(ValueError):
            MeanShiftParams(max_iterations=0)


class TestGaussianBlur:
    def test_constant_image_unchanged(self):
        img = _const_rgb((7, 77, 177))
        out = gaussian_blur(img, 11)
        assert np.array_equal(out.pixels, img.pixels)

    def test_impulse_reproduces_kernel(self):
        arr = np.zeros((31, 31), dtype=np.uint8)
        arr[15, 15] = 255
        sigma = gaussian_sigma_for_kernel(11)
        out = gaussian_blur(GrayImage(arr), 11, sigma)
        k = gaussian_kernel_1d(11, sigma)
        expected = np.floor(255.0 * np.outer(k, k) + 0.5).astype(np.uint8)
        assert np.array_equal(out.pixels[10:21, 10:21], expected)
        assert out.pixels[:10].sum() == 0  # nothing leaks past the kernel reach

    def test_mass_conserved_away_from_borders(self, rng):
        # zero border band wider than the kernel reach makes replication inert
        arr = np.zeros((40, 40))
        arr[6:-6, 6:-6] = rng.integers(0, 256, size=(28, 28))
        blurred = gaussian_blur_array(arr, 11, 2.0)
        assert blurred.mean() == pytest.approx(arr.mean(), abs=1e-6)

    def test_commutes_with_transpose(self, rng):
        arr = rng.integers(0, 256, size=(20, 28), dtype=np.uint8)
        a = gaussian_blur(GrayImage(arr.T.copy()), 7).pixels
        b = gaussian_blur(GrayImage(arr), 7).pixels.T
        assert np.array_equal(a, b)

    def test_kernel_normalized(self):
        assert gaussian_kernel_1d(11, 2.0).sum() == pytest.approx(1.0, abs=1e-12)

    def test_rejects_even_kernel(self):
        with pytest.raises(ValueError):
            gaussian_kernel_1d(10, 1.0)


class TestOtsu:
    def test_two_spike_histogram_picks_smallest_maximizer(self):
        arr = np.zeros((10, 10), dtype=np.uint8)
        arr[:5] = 50
        arr[5:] = 200
        assert otsu_threshold(GrayImage(arr)) == 50

    def test_constant_image_degenerate(self):
        with pytest.raises(DegenerateHistogramError):
            otsu_threshold(GrayImage(np.full((5, 5), 99, dtype=np.uint8)))

    def test_matches_exhaustive_oracle(self, rng):
        for _ in range(100):
            arr = rng.integers(0, 256, size=(32, 32), dtype=np.uint8)
            assert otsu_threshold(GrayImage(arr)) == otsu_oracle(arr)

    def test_position_permutation_invariant(self, rng):
        arr = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
        shuffled = rng.permutation(arr.ravel()).reshape(16, 16)
        assert otsu_threshold(GrayImage(arr)) == otsu_threshold(GrayImage(shuffled))


class TestBinarize:
    def test_all_zero_stays_background(self):
        m = binarize(GrayImage(np.zeros((4, 4), dtype=np.uint8)), 127)
        assert m.area == 0

    def test_all_255_is_foreground(self):
        m = binarize(GrayImage(np.full((4, 4), 255, dtype=np.uint8)), 127)
        assert m.area == 16

    def test_equal_to_level_is_background(self):
        m = binarize(GrayImage(np.full((3, 3), 127, dtype=np.uint8)), 127)
        assert m.area == 0


class TestAdaptiveThreshold:
    def test_constant_image_empty_both_polarities(self):
        img = GrayImage(np.full((20, 20), 140, dtype=np.uint8))
        for polarity in ("darker", "brighter"):
            m = adaptive_threshold_gaussian(img, AdaptiveParams(11, 0, polarity))
            assert m.area == 0

    def test_constant_image_negative_c_fills(self):
        # threshold becomes value + 5, so every pixel sits strictly below it
        img = GrayImage(np.full((12, 12), 88, dtype=np.uint8))
        m = adaptive_threshold_gaussian(img, AdaptiveParams(7, -5, "darker"))
        assert m.area == 144

    def test_matches_windowed_oracle_bitexact(self, rng):
        for block in (11, 77):
            for _ in range(20):
                arr = rng.integers(0, 256, size=(64, 64), dtype=np.uint8)
                got = adaptive_threshold_gaussian(GrayImage(arr), AdaptiveParams(block, 0, "darker"))
                want = adaptive_oracle(arr, block, 0, "darker")
                assert np.array_equal(got.pixels, want)

    def test_polarity_swap_complements_up_to_exact_threshold(self, rng):
        arr = rng.integers(0, 256, size=(48, 48), dtype=np.uint8)
        dark = adaptive_threshold_gaussian(GrayImage(arr), AdaptiveParams(15, 3, "darker"))
        bright = adaptive_threshold_gaussian(GrayImage(arr), AdaptiveParams(15, 3, "brighter"))
        assert not np.any(dark.pixels & bright.pixels)

    def test_rejects_even_block(self):
        with pytest.raises(ValueError):
            AdaptiveParams(block_size=10)
