"""Surround suppression of texture edges on Gabor energy maps.

Dense texture fills the annular surround of every pixel, so subtracting an
annulus-weighted average of nearby energy flattens texture responses while
isolated contours, whose surround is mostly empty, survive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .imaging import GrayImage, Kernel, convolve2d, validate_image

#: Inner surround sigma as a fraction of the channel wavelength; tracks the
#: Gabor envelope so suppression scale follows filter scale.
SIGMA_PER_LAMBDA = 0.56


@dataclass(frozen=True)
class InhibitionParams:
    """Suppression strength and the outer/inner sigma ratio of the surround."""

    alpha: float = 1.0
    surround_ratio: float = 4.0

    def __post_init__(self):
        if not (self.alpha >= 0):
            raise InvalidParameterError(f"alpha must be >= 0, got {self.alpha}")
        if not (self.surround_ratio > 1):
            raise InvalidParameterError(
                f"surround_ratio must be > 1, got {self.surround_ratio}"
            )


@lru_cache(maxsize=64)
def surround_kernel(sigma_inner: float, surround_ratio: float) -> Kernel:
    """Annular surround weights: positive part of a DoG, normalized to sum 1.

    DoG(r) = N(sigma_outer) - N(sigma_inner) with unit-mass Gaussians and
    sigma_outer = surround_ratio * sigma_inner; the half-wave rectification
    keeps the annulus where the wide Gaussian exceeds the narrow one.
    """
    sigma_outer = surround_ratio * sigma_inner
    radius = math.ceil(3.0 * sigma_outer)
    y, x = np.mgrid[-radius : radius + 1, -radius : radius + 1].astype(np.float64)
    r2 = x**2 + y**2

    def gauss(sigma):
        return np.exp(-r2 / (2.0 * sigma**2)) / (2.0 * math.pi * sigma**2)

    dog = gauss(sigma_outer) - gauss(sigma_inner)
    np.maximum(dog, 0.0, out=dog)
    total = dog.sum()
    if total <= 0:
        raise InvalidParameterError(
            f"degenerate surround: sigma_inner={sigma_inner}, ratio={surround_ratio}"
        )
    dog /= total
    dog.setflags(write=False)
    return dog


def surround_inhibition(
    energy: GrayImage,
    params: InhibitionParams,
    wavelength: float,
) -> GrayImage:
    """Subtract alpha times the annular surround average, clamped at zero.

    output = max(0, energy - alpha * (energy (*) w)) where w is the surround
    kernel for sigma_inner = 0.56 * wavelength.  Output never exceeds the
    input and never goes negative.
    """
    img = validate_image(energy, name="energy")
    if np.any(img < 0):
        raise InvalidInputError("energy map must be non-negative")
    if params.alpha == 0:
        return img
    kernel = surround_kernel(SIGMA_PER_LAMBDA * wavelength, params.surround_ratio)
    surround = convolve2d(img, kernel, border="mirror", method="fft")
    # FFT roundoff can leave tiny negative surround values; those would let the
    # output exceed the input, so clamp before subtracting.
    np.maximum(surround, 0.0, out=surround)
    return np.maximum(0.0, img - params.alpha * surround)
