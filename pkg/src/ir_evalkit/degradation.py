"""Seeded parametric degradation pipeline: blur, downsample, noise.

A degraded image is produced as

    lq = clamp( resample( blur(gt, sigma), alpha ) + beta * n, 0, 1 )

with n i.i.d. standard Gaussian from a generator seeded per spec. The whole
pipeline is deterministic per (image, spec), which is what re-degradation
based scoring relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .core import ImagePlane
from .errors import ParameterError


@dataclass(frozen=True)
class DegradationSpec:
    """Parameters of one degradation setting.

    blur_sigma: Gaussian blur std in pixels (0 = no blur).
    downsample_alpha: scale factor >= 1 (output dims = floor(dim / alpha)).
    noise_beta: noise amplitude in signal-range units, in [0, 1).
    seed: 64-bit seed for the noise generator.
    """

    blur_sigma: float = 0.0
    downsample_alpha: float = 1.0
    noise_beta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.blur_sigma < 0:
            raise ParameterError(f"blur_sigma must be >= 0, got {self.blur_sigma}")
        if self.downsample_alpha < 1:
            raise ParameterError(f"downsample_alpha must be >= 1, got {self.downsample_alpha}")
        if not 0 <= self.noise_beta < 1:
            raise ParameterError(f"noise_beta must be in [0, 1), got {self.noise_beta}")

    def to_dict(self) -> dict:
        return {
            "blur_sigma": self.blur_sigma,
            "downsample_alpha": self.downsample_alpha,
            "noise_beta": self.noise_beta,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DegradationSpec":
        return cls(
            blur_sigma=float(d.get("blur_sigma", 0.0)),
            downsample_alpha=float(d.get("downsample_alpha", 1.0)),
            noise_beta=float(d.get("noise_beta", 0.0)),
            seed=int(d.get("seed", 0)),
        )


def retention_rate(spec: DegradationSpec) -> float:
    """Information retention rate (1 - beta) / alpha, in (0, 1]."""
    return (1.0 - spec.noise_beta) / spec.downsample_alpha


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian weights truncated at radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return weights / weights.sum()


def blur(img: ImagePlane, sigma: float) -> ImagePlane:
    """Separable Gaussian blur with reflect-101 borders; sigma=0 is a no-op."""
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img
    kernel = gaussian_kernel(sigma)
    out = np.empty_like(img.data)
    for c in range(img.channels):
        plane = correlate1d(img.data[:, :, c], kernel, axis=0, mode="mirror")
        out[:, :, c] = correlate1d(plane, kernel, axis=1, mode="mirror")
    return ImagePlane(np.clip(out, 0.0, 1.0))


def _cubic(t: np.ndarray) -> np.ndarray:
    """Catmull-Rom kernel (cubic convolution with a = -0.5)."""
    at = np.abs(t)
    at2 = at * at
    at3 = at2 * at
    near = 1.5 * at3 - 2.5 * at2 + 1.0
    far = -0.5 * at3 + 2.5 * at2 - 4.0 * at + 2.0
    return np.where(at <= 1.0, near, np.where(at < 2.0, far, 0.0))


def _resample_axis(arr: np.ndarray, axis: int, out_size: int, scale: float) -> np.ndarray:
    """Cubic-convolution resampling of one axis.

    scale = in_size / out_size. When scale > 1 the kernel support is stretched
    by the scale factor (antialiased downsampling) and weights are
    renormalized per output sample. Out-of-range taps clamp to the edge.
    Source coordinate of output sample j is (j + 0.5) * scale - 0.5.
    """
    in_size = arr.shape[axis]
    stretch = max(scale, 1.0)
    centers = (np.arange(out_size, dtype=np.float64) + 0.5) * scale - 0.5
    support = 2.0 * stretch
    left = np.floor(centers - support).astype(np.int64) + 1
    n_taps = int(math.ceil(2.0 * support)) + 1
    taps = left[:, np.newaxis] + np.arange(n_taps)
    weights = _cubic((taps - centers[:, np.newaxis]) / stretch)
    weights /= weights.sum(axis=1, keepdims=True)
    taps = np.clip(taps, 0, in_size - 1)

    moved = np.moveaxis(arr, axis, 0)
    gathered = moved[taps]                    # (out_size, n_taps, ...)
    out = np.einsum("ot,ot...->o...", weights, gathered)
    return np.moveaxis(out, 0, axis)


def resize(img: ImagePlane, out_width: int, out_height: int) -> ImagePlane:
    """Resize to an explicit size; antialiased when shrinking, plain cubic when
    enlarging. Shared by the descriptor pipeline and size-normalizing callers."""
    if out_width < 1 or out_height < 1:
        raise ParameterError(f"target size must be >= 1, got {out_width}x{out_height}")
    out = img.data
    if out_height != img.height:
        out = _resample_axis(out, 0, out_height, img.height / out_height)
    if out_width != img.width:
        out = _resample_axis(out, 1, out_width, img.width / out_width)
    return ImagePlane(np.clip(out, 0.0, 1.0))


def bicubic_resample(img: ImagePlane, alpha: float) -> ImagePlane:
    """Antialiased cubic downsampling by alpha >= 1; output dims floor(dim/alpha)."""
    if alpha < 1:
        raise ParameterError(f"alpha must be >= 1, got {alpha}")
    out_h = int(math.floor(img.height / alpha))
    out_w = int(math.floor(img.width / alpha))
    if out_h < 1 or out_w < 1:
        raise ParameterError(
            f"alpha={alpha} shrinks {img.width}x{img.height} below 1 pixel")
    out = _resample_axis(img.data, 0, out_h, alpha)
    out = _resample_axis(out, 1, out_w, alpha)
    return ImagePlane(np.clip(out, 0.0, 1.0))


def add_noise(img: ImagePlane, beta: float, seed: int) -> ImagePlane:
    """Add clamped i.i.d. Gaussian noise of amplitude beta, seeded; beta=0 is a no-op."""
    if not 0 <= beta < 1:
        raise ParameterError(f"beta must be in [0, 1), got {beta}")
    if beta == 0:
        return img
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(img.shape)
    return ImagePlane(np.clip(img.data + beta * noise, 0.0, 1.0))


def degrade(img: ImagePlane, spec: DegradationSpec) -> ImagePlane:
    """Full pipeline: blur, then downsample, then noise (in that order)."""
    out = blur(img, spec.blur_sigma)
    out = bicubic_resample(out, spec.downsample_alpha)
    return add_noise(out, spec.noise_beta, spec.seed)
