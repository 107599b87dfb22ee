import math

import numpy as np
import pytest
from PIL import Image

from scenefire.errors import InvalidInputError, InvalidParameterError, UnsupportedImageError
from scenefire.imaging import (
    convolve2d,
    load_image,
    shift_image,
    to_grayscale,
    weighted_max_blur,
)

from oracles import convolve2d_loops, weighted_max_blur_loops


class TestToGrayscale:
    def test_white_pixel_maps_to_one(self):
        out = to_grayscale(np.ones((1, 1, 3)))
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx(1.0)

    def test_pure_red_reads_off_the_coefficient(self):
        rgb = np.zeros((1, 1, 3))
        rgb[0, 0, 0] = 1.0
        assert to_grayscale(rgb)[0, 0] == pytest.approx(0.299)

    def test_matches_elementwise_oracle(self, rng):
        rgb = rng.random((2, 2, 3))
        out = to_grayscale(rgb)
        for y in range(2):
            for x in range(2):
                expected = 0.299 * rgb[y, x, 0] + 0.587 * rgb[y, x, 1] + 0.114 * rgb[y, x, 2]
                assert out[y, x] == pytest.approx(expected, abs=1e-12)

    def test_empty_image_rejected(self):
        with pytest.raises(InvalidInputError):
            to_grayscale(np.zeros((0, 4, 3)))
        with pytest.raises(InvalidInputError):
            to_grayscale(np.zeros((4, 4)))


class TestConvolve2d:
    def test_identity_kernel(self, rng):
        img = rng.random((7, 9))
        out = convolve2d(img, np.array([[1.0]]))
        np.testing.assert_allclose(out, img, atol=1e-15)

    def test_constant_image_zero_sum_kernel(self, rng):
        kernel = rng.random((3, 3))
        kernel -= kernel.mean()
        out = convolve2d(np.full((8, 8), 0.7), kernel, border="mirror")
        np.testing.assert_allclose(out, 0.0, atol=1e-14)

    @pytest.mark.parametrize("border", ["mirror", "zero"])
    def test_direct_matches_nested_loop_oracle(self, rng, border):
        img = rng.random((16, 16))
        kernel = rng.random((5, 5)) - 0.5
        out = convolve2d(img, kernel, border=border, method="direct")
        expected = convolve2d_loops(img, kernel, border=border)
        assert np.max(np.abs(out - expected)) < 1e-9

    def test_fft_matches_direct(self, rng):
        img = rng.random((16, 16))
        kernel = rng.random((5, 5)) - 0.5
        direct = convolve2d(img, kernel, method="direct")
        freq = convolve2d(img, kernel, method="fft")
        assert np.max(np.abs(direct - freq)) < 1e-6

    def test_linearity(self, rng):
        i1, i2 = rng.random((16, 16)), rng.random((16, 16))
        kernel = rng.random((5, 5)) - 0.5
        a, b = 1.7, -0.3
        combined = convolve2d(a * i1 + b * i2, kernel, method="direct")
        separate = a * convolve2d(i1, kernel, method="direct") + \
                   b * convolve2d(i2, kernel, method="direct")
        assert np.max(np.abs(combined - separate)) < 1e-9

    def test_translation_equivariance_interior(self, rng):
        img = rng.random((20, 20))
        kernel = rng.random((5, 5))
        dx, dy = 3, 2
        shifted_first = convolve2d(shift_image(img, dx, dy), kernel, border="zero",
                                   method="direct")
        shifted_after = shift_image(convolve2d(img, kernel, border="zero", method="direct"),
                                    dx, dy)
        guard = 2 + max(abs(dx), abs(dy))  # kernel half-extent + |shift|
        interior = (slice(guard, 20 - guard), slice(guard, 20 - guard))
        np.testing.assert_array_equal(shifted_first[interior], shifted_after[interior])

    def test_even_kernel_rejected(self):
        with pytest.raises(InvalidInputError):
            convolve2d(np.zeros((8, 8)), np.ones((2, 3)))

    def test_oversized_kernel_rejected(self):
        with pytest.raises(InvalidInputError):
            convolve2d(np.zeros((4, 4)), np.ones((9, 9)))

    def test_bad_border_rejected(self):
        with pytest.raises(InvalidParameterError):
            convolve2d(np.zeros((4, 4)), np.ones((1, 1)), border="wrap")


class TestWeightedMaxBlur:
    def test_zero_image_stays_zero(self):
        out = weighted_max_blur(np.zeros((10, 10)), sigma=2.0)
        np.testing.assert_array_equal(out, 0.0)

    def test_impulse_yields_clipped_gaussian(self):
        img = np.zeros((9, 9))
        img[4, 4] = 1.0
        out = weighted_max_blur(img, sigma=1.0)
        for y in range(9):
            for x in range(9):
                r2 = (x - 4) ** 2 + (y - 4) ** 2
                expected = math.exp(-r2 / 2.0) if r2 <= 9.0 else 0.0
                assert out[y, x] == pytest.approx(expected, abs=1e-15), (x, y)

    def test_matches_nested_loop_oracle_exactly(self, rng):
        img = rng.random((8, 8))
        out = weighted_max_blur(img, sigma=1.5)
        expected = weighted_max_blur_loops(img, sigma=1.5)
        np.testing.assert_array_equal(out, expected)

    def test_monotone_in_the_input(self, rng):
        lo = rng.random((12, 12))
        hi = lo + rng.random((12, 12))
        blur_lo = weighted_max_blur(lo, sigma=1.2)
        blur_hi = weighted_max_blur(hi, sigma=1.2)
        assert np.all(blur_lo <= blur_hi + 1e-15)

    def test_dominates_nonnegative_input(self, rng):
        img = rng.random((12, 12))
        out = weighted_max_blur(img, sigma=0.8)
        assert np.all(out >= img)

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_bad_sigma_rejected(self, sigma):
        with pytest.raises(InvalidParameterError):
            weighted_max_blur(np.zeros((4, 4)), sigma)


class TestLoadImage:
    def _save(self, tmp_path, name, fmt, size=(12, 10)):
        path = tmp_path / name
        arr = (np.linspace(0, 255, size[0] * size[1] * 3) % 256).astype(np.uint8)
        Image.fromarray(arr.reshape(size[1], size[0], 3), mode="RGB").save(path, format=fmt)
        return path

    def test_png_roundtrip_range(self, tmp_path):
        path = self._save(tmp_path, "a.png", "PNG")
        img = load_image(path)
        assert img.shape == (10, 12)
        assert img.min() >= 0.0 and img.max() <= 1.0

    def test_jpeg_accepted(self, tmp_path):
        path = self._save(tmp_path, "a.jpg", "JPEG")
        assert load_image(path).shape == (10, 12)

    def test_other_formats_rejected_with_path(self, tmp_path):
        path = self._save(tmp_path, "a.bmp", "BMP")
        with pytest.raises(UnsupportedImageError, match="a.bmp"):
            load_image(path)

    def test_garbage_rejected_with_path(self, tmp_path):
        path = tmp_path / "junk.png"
        path.write_bytes(b"this is not an image")
        with pytest.raises(UnsupportedImageError, match="junk.png"):
            load_image(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "absent.png")

    def test_resize_max_caps_the_long_side(self, tmp_path):
        path = self._save(tmp_path, "wide.png", "PNG", size=(40, 20))
        img = load_image(path, max_dim=20)
        assert max(img.shape) == 20
        assert img.shape == (10, 20)

    def test_white_decodes_to_one(self, tmp_path):
        path = tmp_path / "white.png"
        Image.fromarray(np.full((4, 4, 3), 255, dtype=np.uint8)).save(path, format="PNG")
        np.testing.assert_allclose(load_image(path), 1.0)
