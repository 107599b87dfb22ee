"""Gabor filter bank and per-channel energy maps.

A channel is one (wavelength, orientation) pair.  Channel energy is the
magnitude of the quadrature pair (phases 0 and -pi/2), so it responds to
lines and edges regardless of contrast polarity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .imaging import GrayImage, Kernel, convolve2d, validate_image
from .inhibition import InhibitionParams, surround_inhibition


@dataclass(frozen=True)
class GaborParams:
    """One Gabor kernel: wavelength/orientation plus the envelope shape."""

    wavelength: float
    theta: float
    gamma: float = 0.5
    sigma_over_lambda: float = 0.56
    psi: float = 0.0

    def __post_init__(self):
        if not (self.wavelength >= 2):
            raise InvalidParameterError(f"wavelength must be >= 2, got {self.wavelength}")
        if not (0 < self.gamma <= 1):
            raise InvalidParameterError(f"gamma must be in (0, 1], got {self.gamma}")
        if not (self.sigma_over_lambda > 0):
            raise InvalidParameterError(
                f"sigma_over_lambda must be > 0, got {self.sigma_over_lambda}"
            )
        if not (0 <= self.theta < math.pi):
            raise InvalidParameterError(f"theta must be in [0, pi), got {self.theta}")

    @property
    def sigma(self) -> float:
        return self.sigma_over_lambda * self.wavelength


@dataclass(frozen=True)
class GaborBank:
    """The (wavelength x orientation) grid shared by every filter of a bank.

    ``t1`` is the noise floor: stack values below t1 times the stack-wide
    maximum are zeroed, so weak channels cannot promote noise to responses.
    """

    wavelengths: tuple[float, ...] = (4.0, 4.0 * math.sqrt(2), 8.0, 8.0 * math.sqrt(2), 16.0)
    thetas: tuple[float, ...] = tuple(k * math.pi / 8 for k in range(8))
    gamma: float = 0.5
    sigma_over_lambda: float = 0.56
    t1: float = 0.1

    def __post_init__(self):
        if not self.wavelengths or not self.thetas:
            raise InvalidParameterError("bank needs at least one wavelength and one orientation")
        if any(w < 2 for w in self.wavelengths):
            raise InvalidParameterError(f"wavelengths must be >= 2, got {self.wavelengths}")
        if any(b <= a for a, b in zip(self.wavelengths, self.wavelengths[1:])):
            raise InvalidParameterError("wavelengths must be strictly increasing")
        if len(set(self.thetas)) != len(self.thetas):
            raise InvalidParameterError("orientations must be distinct")
        if any(not (0 <= t < math.pi) for t in self.thetas):
            raise InvalidParameterError("orientations must lie in [0, pi)")
        if not (0 <= self.t1 <= 1):
            raise InvalidParameterError(f"t1 must be in [0, 1], got {self.t1}")

    def channels(self) -> list[tuple[float, float]]:
        return [(lam, th) for lam in self.wavelengths for th in self.thetas]

    def snap_theta(self, theta: float) -> float:
        """Nearest bank orientation to ``theta`` under circular distance mod pi."""
        theta = theta % math.pi
        return min(
            self.thetas,
            key=lambda t: min(abs(t - theta), math.pi - abs(t - theta)),
        )

    def params(self, wavelength: float, theta: float, psi: float = 0.0) -> GaborParams:
        return GaborParams(wavelength, theta, self.gamma, self.sigma_over_lambda, psi)


@dataclass
class EnergyStack:
    """Per-channel energy maps over one source image."""

    entries: dict[tuple[float, float], GrayImage]
    width: int
    height: int

    def __post_init__(self):
        for key, arr in self.entries.items():
            if arr.shape != (self.height, self.width):
                raise InvalidInputError(f"channel {key} has shape {arr.shape}, "
                                        f"expected {(self.height, self.width)}")

    def global_max(self) -> float:
        return max((float(arr.max()) for arr in self.entries.values()), default=0.0)


@lru_cache(maxsize=512)
def gabor_kernel(params: GaborParams) -> Kernel:
    """Sample the Gabor function on its support grid, DC-free and L2-normalized.

    g(x, y) = exp(-(x'^2 + gamma^2 y'^2) / (2 sigma^2)) * cos(2 pi x'/lambda + psi)
    with x' = x cos(theta) + y sin(theta), y' = -x sin(theta) + y cos(theta),
    sigma = sigma_over_lambda * lambda, support radius ceil(3 sigma).  The mean
    is subtracted and the result scaled to unit L2 norm.
    """
    sigma = params.sigma
    radius = math.ceil(3.0 * sigma)
    y, x = np.mgrid[-radius : radius + 1, -radius : radius + 1].astype(np.float64)
    ct, st = math.cos(params.theta), math.sin(params.theta)
    xp = x * ct + y * st
    yp = -x * st + y * ct
    g = np.exp(-(xp**2 + params.gamma**2 * yp**2) / (2.0 * sigma**2))
    g *= np.cos(2.0 * math.pi * xp / params.wavelength + params.psi)
    # disk support: a square grid is not rotation-invariant, so orientation
    # variants would disagree in the corners
    disk = x**2 + y**2 <= (3.0 * sigma) ** 2
    g[~disk] = 0.0
    g[disk] -= g[disk].mean()
    norm = np.linalg.norm(g)
    if norm > 0:
        g /= norm
    g.setflags(write=False)
    return g


def gabor_energy(
    image: GrayImage,
    wavelength: float,
    theta: float,
    gamma: float = 0.5,
    sigma_over_lambda: float = 0.56,
    method: str = "auto",
) -> GrayImage:
    """Quadrature-pair energy sqrt(even^2 + odd^2) for one channel."""
    img = validate_image(image)
    even = convolve2d(img, gabor_kernel(GaborParams(wavelength, theta, gamma, sigma_over_lambda, 0.0)),
                      method=method)
    odd = convolve2d(img, gabor_kernel(GaborParams(wavelength, theta, gamma, sigma_over_lambda, -math.pi / 2)),
                     method=method)
    return np.hypot(even, odd)


def threshold_stack(entries: dict[tuple[float, float], GrayImage], t1: float) -> None:
    """Zero stack values strictly below t1 times the stack-wide maximum, in place."""
    gmax = max((float(arr.max()) for arr in entries.values()), default=0.0)
    if gmax <= 0 or t1 <= 0:
        return
    floor = t1 * gmax
    for arr in entries.values():
        arr[arr < floor] = 0.0


def raw_channel(
    image: GrayImage,
    wavelength: float,
    theta: float,
    bank: GaborBank,
    inhibition: InhibitionParams | None = None,
) -> GrayImage:
    """One channel's energy with surround inhibition applied, before the t1 floor."""
    energy = gabor_energy(image, wavelength, theta, bank.gamma, bank.sigma_over_lambda)
    if inhibition is not None and inhibition.alpha > 0:
        energy = surround_inhibition(energy, inhibition, wavelength)
    return energy


def channel_responses(
    image: GrayImage,
    channels: list[tuple[float, float]],
    bank: GaborBank,
    inhibition: InhibitionParams | None = None,
) -> EnergyStack:
    """Energy maps for an explicit channel list, inhibited then t1-thresholded.

    The t1 floor is measured against the maximum across the *given* channels,
    matching bank_responses when the list is the bank's full cross-product.
    """
    img = validate_image(image)
    entries: dict[tuple[float, float], GrayImage] = {}
    for lam, th in channels:
        entries[(lam, th)] = raw_channel(img, lam, th, bank, inhibition)
    threshold_stack(entries, bank.t1)
    return EnergyStack(entries, width=img.shape[1], height=img.shape[0])


def bank_responses(
    image: GrayImage,
    bank: GaborBank,
    inhibition: InhibitionParams | None = None,
) -> EnergyStack:
    """Energy maps over the bank's full (wavelength x orientation) grid."""
    return channel_responses(image, bank.channels(), bank, inhibition)
