"""Trainable keypoint filters: configuration from a prototype, application as a
weighted geometric mean of blurred and shifted Gabor subunit responses.

A filter is a set of tuples (wavelength, theta, rho, phi): Gabor channel
(wavelength, theta) expected at polar position (rho, phi) relative to the
keypoint.  Configuration reads those tuples off a prototype image; application
collects each subunit's evidence, blurs it with a tolerance that grows with
eccentricity, shifts it back onto the keypoint, and combines multiplicatively
so the filter fires only where every part of the pattern is present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConfigurationFailedError,
    InvalidInputError,
    InvalidKeypointError,
    InvalidParameterError,
)
from .gabor import EnergyStack, GaborBank, bank_responses, raw_channel, threshold_stack
from .imaging import GrayImage, shift_image, validate_image, weighted_max_blur
from .inhibition import InhibitionParams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CosfireTuple:
    """One subunit: Gabor channel (wavelength, theta) at polar offset (rho, phi)."""

    wavelength: float
    theta: float
    rho: float
    phi: float

    def __post_init__(self):
        if not (self.rho >= 0):
            raise InvalidParameterError(f"rho must be >= 0, got {self.rho}")
        if not (0 <= self.phi < TWO_PI):
            raise InvalidParameterError(f"phi must be in [0, 2*pi), got {self.phi}")


@dataclass(frozen=True)
class CosfireFilter:
    """A configured pattern detector and the parameters it was built with.

    Blur grows with eccentricity as sigma0 + alpha_blur * rho.  weight_sigma
    is either the string "uniform" or the sigma of Gaussian tuple weights
    exp(-rho^2 / (2 sigma^2)).  prototype_response is the filter's peak on its
    own prototype, recorded at configuration time and used to normalize
    responses on other images.
    """

    name: str
    scene: str
    tuples: tuple[CosfireTuple, ...]
    sigma0: float = 0.67
    alpha_blur: float = 0.1
    t2: float = 0.75
    t3: float = 0.25
    weight_sigma: float | str = "uniform"
    prototype_response: float = 0.0

    def __post_init__(self):
        if not self.tuples:
            raise InvalidParameterError(f"filter {self.name!r} has no tuples")
        if not (self.sigma0 > 0):
            raise InvalidParameterError(f"sigma0 must be > 0, got {self.sigma0}")
        if not (self.alpha_blur >= 0):
            raise InvalidParameterError(f"alpha_blur must be >= 0, got {self.alpha_blur}")
        for frac, label in ((self.t2, "t2"), (self.t3, "t3")):
            if not (0 <= frac <= 1):
                raise InvalidParameterError(f"{label} must be in [0, 1], got {frac}")
        if self.weight_sigma != "uniform" and not (
            isinstance(self.weight_sigma, (int, float)) and self.weight_sigma > 0
        ):
            raise InvalidParameterError(
                f'weight_sigma must be "uniform" or a positive number, got {self.weight_sigma!r}'
            )
        if not (self.prototype_response >= 0):
            raise InvalidParameterError(
                f"prototype_response must be >= 0, got {self.prototype_response}"
            )

    def tuple_weight(self, rho: float) -> float:
        if self.weight_sigma == "uniform":
            return 1.0
        return math.exp(-(rho**2) / (2.0 * float(self.weight_sigma) ** 2))

    def blur_sigma(self, rho: float) -> float:
        return self.sigma0 + self.alpha_blur * rho


@dataclass(frozen=True)
class ConfigSpec:
    """Everything configure_filter needs besides the prototype itself."""

    bank: GaborBank = field(default_factory=GaborBank)
    inhibition: InhibitionParams | None = None
    radii: tuple[float, ...] = (0.0, 5.0, 10.0, 20.0)
    angular_step: float = math.pi / 60
    t2: float = 0.75
    t3: float = 0.25
    sigma0: float = 0.67
    alpha_blur: float = 0.1
    weight_sigma: float | str = "uniform"

    def __post_init__(self):
        if not self.radii or self.radii[0] != 0:
            raise InvalidParameterError(f"radii must start at 0, got {self.radii}")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise InvalidParameterError(f"radii must be strictly ascending, got {self.radii}")
        if not (0 < self.angular_step <= math.pi / 8):
            raise InvalidParameterError(
                f"angular_step must be in (0, pi/8], got {self.angular_step}"
            )


class ChannelCache:
    """Memoizes inhibited (pre-threshold) channel energies for one image.

    Lets one frame share Gabor/inhibition convolutions across filters and
    rotation variants.  Not thread-safe; use one cache per worker and image.
    """

    def __init__(self, image: GrayImage, bank: GaborBank,
                 inhibition: InhibitionParams | None = None):
        self.image = validate_image(image)
        self.bank = bank
        self.inhibition = inhibition
        self._maps: dict[tuple[float, float], GrayImage] = {}

    def channel(self, wavelength: float, theta: float) -> GrayImage:
        key = (wavelength, theta)
        cached = self._maps.get(key)
        if cached is None:
            cached = raw_channel(self.image, wavelength, theta, self.bank, self.inhibition)
            cached.setflags(write=False)
            self._maps[key] = cached
        return cached


def weighted_geometric_mean(maps: list[GrayImage], weights: list[float]) -> GrayImage:
    """r = (prod_i s_i^(w_i))^(1 / sum w).  Any zero subunit forces r = 0 there.

    Computed in log space on the strictly-positive mask, so no log(0) is ever
    taken and the annihilation rule is exact for every subunit regardless of
    its weight.
    """
    if not maps or len(maps) != len(weights):
        raise InvalidInputError("need one weight per subunit map")
    total = float(sum(weights))
    if total <= 0:
        raise InvalidInputError(f"weights must sum to a positive value, got {total}")
    mask = maps[0] > 0
    for s in maps[1:]:
        mask &= s > 0
    out = np.zeros_like(maps[0], dtype=np.float64)
    if np.any(mask):
        acc = np.zeros(int(mask.sum()), dtype=np.float64)
        for s, w in zip(maps, weights):
            acc += w * np.log(s[mask])
        out[mask] = np.exp(acc / total)
    return out


def _circular_local_maxima(values: np.ndarray) -> list[int]:
    """Indices of strict circular local maxima, plateaus collapsed to their middle.

    A constant profile has no maxima.  Runs of equal consecutive values count
    as one candidate, kept only when both neighboring runs are lower.
    """
    n = len(values)
    if n == 0 or np.all(values == values[0]):
        return []
    start = next(i for i in range(n) if values[i] != values[i - 1])
    runs: list[tuple[float, list[int]]] = []
    current_val, current = values[start], [start]
    for off in range(1, n):
        i = (start + off) % n
        if values[i] == current_val:
            current.append(i)
        else:
            runs.append((current_val, current))
            current_val, current = values[i], [i]
    runs.append((current_val, current))
    keep = []
    for j, (val, idxs) in enumerate(runs):
        if val > runs[j - 1][0] and val > runs[(j + 1) % len(runs)][0]:
            keep.append(idxs[len(idxs) // 2])
    return sorted(keep)


def _bank_support_radius(bank: GaborBank) -> int:
    return math.ceil(3.0 * bank.sigma_over_lambda * max(bank.wavelengths))


def _stack_values_at(stack: EnergyStack, x: int, y: int) -> dict[tuple[float, float], float]:
    return {key: float(arr[y, x]) for key, arr in stack.entries.items()}


def configure_filter(
    prototype: GrayImage,
    keypoint: tuple[float, float],
    spec: ConfigSpec,
    name: str,
    scene: str,
    stack: EnergyStack | None = None,
    cache: ChannelCache | None = None,
) -> CosfireFilter:
    """Build a filter from a prototype image and a keypoint.

    Scans circles of the configured radii around the keypoint on the bank's
    energy stack; angular positions that are circular local maxima and reach
    t2 times the neighborhood's peak become subunit locations, and every
    channel reaching t2 times the local cross-channel maximum contributes a
    tuple there.  The filter's own peak response on the prototype is recorded
    for later normalization.

    ``stack`` and ``cache`` let callers configuring several keypoints on the
    same prototype reuse the per-image computations.
    """
    img = validate_image(prototype, name="prototype")
    h, w = img.shape
    kx, ky = float(keypoint[0]), float(keypoint[1])
    rmax = max(spec.radii)
    margin = rmax + _bank_support_radius(spec.bank)
    if not (margin <= kx <= w - 1 - margin and margin <= ky <= h - 1 - margin):
        raise InvalidKeypointError(
            f"keypoint ({kx:g}, {ky:g}) closer than {margin:g} px to the border "
            f"of a {w}x{h} prototype"
        )
    if stack is None:
        stack = bank_responses(img, spec.bank, spec.inhibition)

    # Reference level: the stack's peak over the disk the circles live in.
    yy, xx = np.ogrid[:h, :w]
    neighborhood = (xx - kx) ** 2 + (yy - ky) ** 2 <= max(rmax, 1.0) ** 2
    ref = max(float(arr[neighborhood].max()) for arr in stack.entries.values())
    if ref <= 0:
        raise ConfigurationFailedError(
            f"prototype region around ({kx:g}, {ky:g}) has no energy; "
            f"cannot configure filter {name!r}"
        )

    positions: list[tuple[float, float, int, int]] = []  # (rho, phi, px, py)
    for rho in spec.radii:
        if rho == 0:
            px, py = round(kx), round(ky)
            val = max(_stack_values_at(stack, px, py).values())
            if val > 0 and val >= spec.t2 * ref:
                positions.append((0.0, 0.0, px, py))
            continue
        n_samples = max(4, round(TWO_PI / spec.angular_step))
        phis = np.arange(n_samples) * (TWO_PI / n_samples)
        pxs = np.rint(kx + rho * np.cos(phis)).astype(int)
        pys = np.rint(ky + rho * np.sin(phis)).astype(int)
        profile = np.zeros(n_samples)
        for k in range(n_samples):
            profile[k] = max(_stack_values_at(stack, pxs[k], pys[k]).values())
        for k in _circular_local_maxima(profile):
            if profile[k] > 0 and profile[k] >= spec.t2 * ref:
                positions.append((float(rho), float(phis[k]), int(pxs[k]), int(pys[k])))

    tuples: list[CosfireTuple] = []
    for rho, phi, px, py in positions:
        by_channel = _stack_values_at(stack, px, py)
        local_max = max(by_channel.values())
        for (lam, th), val in by_channel.items():
            if val > 0 and val >= spec.t2 * local_max:
                tuples.append(CosfireTuple(lam, th, rho, phi))

    if not tuples:
        raise ConfigurationFailedError(
            f"no tuple passed the t2={spec.t2} threshold for filter {name!r}; "
            "the prototype region appears featureless"
        )

    filt = CosfireFilter(
        name=name,
        scene=scene,
        tuples=tuple(tuples),
        sigma0=spec.sigma0,
        alpha_blur=spec.alpha_blur,
        t2=spec.t2,
        t3=spec.t3,
        weight_sigma=spec.weight_sigma,
    )
    response = apply_filter(img, filt, spec.bank, spec.inhibition, cache=cache)
    peak = float(response.max())
    if peak <= 0:
        raise ConfigurationFailedError(
            f"filter {name!r} gives no response on its own prototype"
        )
    return replace(filt, prototype_response=peak)


def apply_filter(
    image: GrayImage,
    filt: CosfireFilter,
    bank: GaborBank,
    inhibition: InhibitionParams | None = None,
    cache: ChannelCache | None = None,
) -> GrayImage:
    """Response map of one filter over an image.

    Each tuple's channel energy is blurred with sigma0 + alpha_blur * rho and
    shifted by (-rho cos phi, -rho sin phi) so its evidence lands on the
    keypoint position; the weighted geometric mean of the shifted maps is then
    thresholded at t3 times its own peak.  Positions shifted in from outside
    the image read as zero.
    """
    img = validate_image(image)
    if cache is None:
        cache = ChannelCache(img, bank, inhibition)

    needed = {(t.wavelength, t.theta) for t in filt.tuples}
    sub_stack = {ch: cache.channel(*ch).copy() for ch in needed}
    # The t1 floor for application is measured over the filter's own channels.
    threshold_stack(sub_stack, bank.t1)

    blurred: dict[tuple[float, float, float], GrayImage] = {}
    maps, weights = [], []
    for tup in filt.tuples:
        sigma = filt.blur_sigma(tup.rho)
        key = (tup.wavelength, tup.theta, sigma)
        if key not in blurred:
            blurred[key] = weighted_max_blur(sub_stack[(tup.wavelength, tup.theta)], sigma)
        dx = round(-tup.rho * math.cos(tup.phi))
        dy = round(-tup.rho * math.sin(tup.phi))
        maps.append(shift_image(blurred[key], dx, dy))
        weights.append(filt.tuple_weight(tup.rho))

    response = weighted_geometric_mean(maps, weights)
    peak = float(response.max())
    if peak > 0 and filt.t3 > 0:
        response[response < filt.t3 * peak] = 0.0
    return response


def rotate_tuples(filt: CosfireFilter, psi: float, bank: GaborBank) -> CosfireFilter:
    """Rotate the tuple set by psi: theta+psi snapped to the bank grid, phi+psi."""
    rotated = tuple(
        CosfireTuple(
            t.wavelength,
            bank.snap_theta(t.theta + psi),
            t.rho,
            (t.phi + psi) % TWO_PI,
        )
        for t in filt.tuples
    )
    return replace(filt, tuples=rotated)


def rotation_tolerant_apply(
    image: GrayImage,
    filt: CosfireFilter,
    psis: list[float],
    bank: GaborBank,
    inhibition: InhibitionParams | None = None,
    cache: ChannelCache | None = None,
) -> GrayImage:
    """Pointwise maximum of apply_filter over rotated tuple sets.

    psis must be non-empty and contain 0, so the response never falls below
    the unrotated one.
    """
    if not psis:
        raise InvalidParameterError("psis must be non-empty")
    if not any(p == 0 for p in psis):
        raise InvalidParameterError("psis must contain 0")
    img = validate_image(image)
    if cache is None:
        cache = ChannelCache(img, bank, inhibition)
    out = None
    for psi in psis:
        variant = filt if psi == 0 else rotate_tuples(filt, psi, bank)
        r = apply_filter(img, variant, bank, inhibition, cache=cache)
        out = r if out is None else np.maximum(out, r)
    return out
