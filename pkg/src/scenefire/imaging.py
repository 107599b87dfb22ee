"""Image decoding and the two filtering primitives everything else builds on.

A grayscale image is a plain 2D float64 array, row-major, indexed [y, x]
with x rightward, y downward and the origin at the top-left pixel.  Decoded
intensities live in [0, 1].  Kernels are small odd-sized 2D float arrays.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import signal

from .errors import InvalidInputError, InvalidParameterError, UnsupportedImageError

GrayImage = np.ndarray
Kernel = np.ndarray

#: Rec. 601 luma coefficients for R, G, B.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_BORDERS = ("mirror", "zero")
_METHODS = ("auto", "direct", "fft")


def validate_image(image: np.ndarray, name: str = "image") -> GrayImage:
    """Check that ``image`` is a non-empty, finite 2D array; return it as float64."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 2D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def to_grayscale(rgb: np.ndarray) -> GrayImage:
    """Collapse an (H, W, 3) array with channels in [0, 1] to luma intensities.

    Uses the 0.299/0.587/0.114 weighting, so output dimensions equal input
    dimensions and values stay in [0, 1].
    """
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidInputError(f"expected a non-empty (H, W, 3) array, got shape {arr.shape}")
    r, g, b = LUMA_WEIGHTS
    return r * arr[:, :, 0] + g * arr[:, :, 1] + b * arr[:, :, 2]


def load_image(path: str | Path, max_dim: int | None = None) -> GrayImage:
    """Decode a PNG or JPEG file into a grayscale image with values in [0, 1].

    ``max_dim`` optionally downscales so the larger side does not exceed it
    (aspect ratio preserved); by default no resizing happens.  Other formats
    are rejected with an error naming the path.
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.format not in ("PNG", "JPEG"):
                raise UnsupportedImageError(
                    f"{path}: unsupported format {img.format!r}, expected PNG or JPEG"
                )
            img = img.convert("RGB")
            if max_dim is not None and max(img.size) > max_dim:
                scale = max_dim / max(img.size)
                new_size = (max(1, round(img.size[0] * scale)), max(1, round(img.size[1] * scale)))
                img = img.resize(new_size, Image.Resampling.LANCZOS)
            rgb = np.asarray(img, dtype=np.float64) / 255.0
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as exc:
        raise UnsupportedImageError(f"{path}: cannot decode image ({exc})") from exc
    return to_grayscale(rgb)


def _check_kernel(image: GrayImage, kernel: np.ndarray) -> Kernel:
    ker = np.asarray(kernel, dtype=np.float64)
    if ker.ndim != 2 or ker.size == 0:
        raise InvalidInputError(f"kernel must be a non-empty 2D array, got shape {ker.shape}")
    if ker.shape[0] % 2 == 0 or ker.shape[1] % 2 == 0:
        raise InvalidInputError(f"kernel dimensions must be odd, got {ker.shape}")
    if not np.all(np.isfinite(ker)):
        raise InvalidInputError("kernel contains non-finite values")
    if ker.shape[0] >= 2 * image.shape[0] or ker.shape[1] >= 2 * image.shape[1]:
        raise InvalidInputError(
            f"kernel {ker.shape} too large for image {image.shape}; "
            "must be smaller than twice the image extent in each dimension"
        )
    return ker


def convolve2d(
    image: GrayImage,
    kernel: Kernel,
    border: str = "mirror",
    method: str = "auto",
) -> GrayImage:
    """Same-size 2D filtering in the correlation convention (kernel not flipped).

    out(x, y) = sum over kernel offsets (dx, dy) of k(dx, dy) * in(x+dx, y+dy),
    reading outside the image per ``border``: "mirror" reflects across the edge
    (edge pixel included), "zero" pads with zeros.  ``method`` picks the spatial
    ("direct") or frequency-domain ("fft") path; "auto" lets the backend choose.
    """
    img = validate_image(image)
    ker = _check_kernel(img, kernel)
    if border not in _BORDERS:
        raise InvalidParameterError(f"border must be one of {_BORDERS}, got {border!r}")
    if method not in _METHODS:
        raise InvalidParameterError(f"method must be one of {_METHODS}, got {method!r}")

    pad_y, pad_x = ker.shape[0] // 2, ker.shape[1] // 2
    pad_mode = "symmetric" if border == "mirror" else "constant"
    padded = np.pad(img, ((pad_y, pad_y), (pad_x, pad_x)), mode=pad_mode)
    # correlate == un-flipped kernel; 'valid' on the padded image keeps the size
    return signal.correlate(padded, ker, mode="valid", method=method)


def weighted_max_blur(image: GrayImage, sigma: float) -> GrayImage:
    """Gaussian-weighted maximum over a disk of radius 3*sigma.

    out(x, y) = max over offsets (dx, dy) with dx^2+dy^2 <= (3*sigma)^2 of
    in(x-dx, y-dy) * exp(-(dx^2+dy^2) / (2*sigma^2)); out-of-image positions
    contribute nothing.  The (0, 0) term has weight 1, so for non-negative
    inputs the output dominates the input pointwise.
    """
    img = validate_image(image)
    if not (sigma > 0):
        raise InvalidParameterError(f"sigma must be > 0, got {sigma}")

    radius = math.ceil(3.0 * sigma)
    h, w = img.shape
    out = np.full_like(img, -np.inf)
    limit = (3.0 * sigma) ** 2
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            r2 = dx * dx + dy * dy
            if r2 > limit:
                continue
            weight = math.exp(-r2 / (2.0 * sigma * sigma))
            # out[y, x] candidate = img[y-dy, x-dx] * weight, valid indices only
            ty0, ty1 = max(dy, 0), h + min(dy, 0)
            tx0, tx1 = max(dx, 0), w + min(dx, 0)
            if ty0 >= ty1 or tx0 >= tx1:
                continue
            target = out[ty0:ty1, tx0:tx1]
            source = img[ty0 - dy : ty1 - dy, tx0 - dx : tx1 - dx]
            np.maximum(target, source * weight, out=target)
    return out


def shift_image(image: GrayImage, dx: int, dy: int) -> GrayImage:
    """Translate by whole pixels (dx, dy); positions shifted in from outside read 0."""
    img = np.asarray(image)
    h, w = img.shape
    out = np.zeros_like(img)
    ty0, ty1 = max(dy, 0), h + min(dy, 0)
    tx0, tx1 = max(dx, 0), w + min(dx, 0)
    if ty0 < ty1 and tx0 < tx1:
        out[ty0:ty1, tx0:tx1] = img[ty0 - dy : ty1 - dy, tx0 - dx : tx1 - dx]
    return out
