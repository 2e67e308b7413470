"""Full-reference distortion metrics: MSE, PSNR, and single-scale SSIM.

SSIM is computed on luminance with an 11x11 Gaussian window (sigma 1.5) and a
valid-window border policy: the (window-1)/2 outermost positions are excluded
rather than padded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .core import ImagePlane, luma_field
from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class SsimParams:
    window_size: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ParameterError(f"window_size must be odd and >= 3, got {self.window_size}")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ParameterError("k1 and k2 must be > 0")


def _check_shapes(a: ImagePlane, b: ImagePlane) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def mse(a: ImagePlane, b: ImagePlane) -> float:
    """Mean squared sample difference over all samples (all channels)."""
    _check_shapes(a, b)
    diff = a.data - b.data
    return float(np.mean(diff * diff))


def psnr(a: ImagePlane, b: ImagePlane) -> float:
    """Peak signal-to-noise ratio in dB for unit dynamic range.

    Identical images yield math.inf; record writers cap that sentinel.
    """
    err = mse(a, b)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(1.0 / err)


def _window(params: SsimParams) -> np.ndarray:
    radius = params.window_size // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(offsets**2) / (2.0 * params.window_sigma**2))
    return w / w.sum()


def _local_mean(field: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Separable windowed mean, cropped to valid window positions."""
    radius = len(window) // 2
    out = correlate1d(field, window, axis=0, mode="constant")
    out = correlate1d(out, window, axis=1, mode="constant")
    return out[radius:-radius, radius:-radius]


def ssim(a: ImagePlane, b: ImagePlane, params: SsimParams = SsimParams()) -> float:
    """Mean structural similarity over all valid window positions, in [-1, 1]."""
    _check_shapes(a, b)
    if min(a.height, a.width) < params.window_size:
        raise DimensionError(
            f"image {a.width}x{a.height} smaller than {params.window_size}-tap window")
    x = luma_field(a)
    y = luma_field(b)
    window = _window(params)

    mu_x = _local_mean(x, window)
    mu_y = _local_mean(y, window)
    xx = _local_mean(x * x, window)
    yy = _local_mean(y * y, window)
    xy = _local_mean(x * y, window)
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y

    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))
