"""Brute-force reference implementations the library is tested against.

Everything here recomputes results from the definitions with explicit loops
and its own border handling, independent of the library's scipy-backed paths.
"""

from __future__ import annotations

import math

import numpy as np


def reflect_index(i: int, n: int) -> int:
    """Mirror across the border with the edge pixel included (…cba|abc…)."""
    while not (0 <= i < n):
        if i < 0:
            i = -i - 1
        else:
            i = 2 * n - 1 - i
    return i


def convolve2d_loops(image: np.ndarray, kernel: np.ndarray, border: str = "mirror") -> np.ndarray:
    """Scalar nested-loop correlation (kernel not flipped)."""
    h, w = image.shape
    kh, kw = kernel.shape
    hh, hw = kh // 2, kw // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(-hh, hh + 1):
                for dx in range(-hw, hw + 1):
                    sy, sx = y + dy, x + dx
                    if border == "mirror":
                        value = image[reflect_index(sy, h), reflect_index(sx, w)]
                    elif 0 <= sy < h and 0 <= sx < w:
                        value = image[sy, sx]
                    else:
                        value = 0.0
                    acc += value * kernel[dy + hh, dx + hw]
            out[y, x] = acc
    return out


def convolve2d_windows(image: np.ndarray, kernel: np.ndarray, border: str = "mirror") -> np.ndarray:
    """Per-output-pixel window sums with hand-rolled reflection padding."""
    h, w = image.shape
    kh, kw = kernel.shape
    hh, hw = kh // 2, kw // 2
    padded = np.zeros((h + 2 * hh, w + 2 * hw))
    for y in range(-hh, h + hh):
        for x in range(-hw, w + hw):
            if border == "mirror":
                padded[y + hh, x + hw] = image[reflect_index(y, h), reflect_index(x, w)]
            elif 0 <= y < h and 0 <= x < w:
                padded[y + hh, x + hw] = image[y, x]
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            out[y, x] = float(np.sum(padded[y : y + kh, x : x + kw] * kernel))
    return out


def weighted_max_blur_loops(image: np.ndarray, sigma: float) -> np.ndarray:
    """Scalar nested-loop Gaussian-weighted maximum over the 3-sigma disk."""
    h, w = image.shape
    radius = math.ceil(3.0 * sigma)
    limit = (3.0 * sigma) ** 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            best = -math.inf
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    r2 = dx * dx + dy * dy
                    if r2 > limit:
                        continue
                    sy, sx = y - dy, x - dx
                    if not (0 <= sy < h and 0 <= sx < w):
                        continue
                    candidate = image[sy, sx] * math.exp(-r2 / (2.0 * sigma * sigma))
                    if candidate > best:
                        best = candidate
            out[y, x] = best
    return out


def surround_inhibition_loops(energy: np.ndarray, alpha: float, surround_ratio: float,
                              wavelength: float) -> np.ndarray:
    """The suppression formula recomputed with its own DoG and window sums."""
    sigma_in = 0.56 * wavelength
    sigma_out = surround_ratio * sigma_in
    radius = math.ceil(3.0 * sigma_out)
    size = 2 * radius + 1
    weight = np.zeros((size, size))
    for j in range(size):
        for i in range(size):
            r2 = (i - radius) ** 2 + (j - radius) ** 2
            outer = math.exp(-r2 / (2 * sigma_out**2)) / (2 * math.pi * sigma_out**2)
            inner = math.exp(-r2 / (2 * sigma_in**2)) / (2 * math.pi * sigma_in**2)
            weight[j, i] = max(0.0, outer - inner)
    weight /= weight.sum()
    surround = convolve2d_windows(energy, weight, border="mirror")
    return np.maximum(0.0, energy - alpha * surround)


def fill_holes_loops(labels: list[str], k: int, unknown: str = "unknown") -> list[str]:
    """Window-scan reimplementation of the hole-filling rule on plain labels."""
    out = list(labels)
    for i, lab in enumerate(labels):
        if lab != unknown:
            continue
        left = labels[max(0, i - k) : i]
        right = labels[i + 1 : i + 1 + k]
        window = left + right
        for scene in {l for l in window if l != unknown}:
            if (scene in left and scene in right
                    and all(l in (scene, unknown) for l in window)):
                out[i] = scene
                break
    return out
