"""Core image representation and PNG I/O.

Pixels live in [0, 1] float64 everywhere in this package; metrics that need a
[0, 255] convention rescale internally.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import cv2
import numpy as np

from .errors import DimensionError, FormatError

# Rec. 601 luma weights, the convention reference SSIM/NIQE implementations use.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True)
class ImagePlane:
    """Immutable raster: float64 samples in [0, 1], shape (height, width, channels).

    channels is 1 (luma) or 3 (RGB). The backing array is marked read-only so
    instances can be shared freely across parallel workers.
    """

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise DimensionError(f"expected (h, w, 1|3) samples, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"image dimensions must be >= 1, got {arr.shape[:2]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image samples must be finite")
        lo, hi = float(arr.min()), float(arr.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"samples outside [0, 1]: min={lo}, max={hi}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape


def load_image(path: str | os.PathLike) -> ImagePlane:
    """Read an 8- or 16-bit PNG (grayscale or RGB; alpha stripped).

    Samples are scaled to [0, 1] by dividing by (2^bitdepth - 1).
    """
    with open(path, "rb") as fh:
        if fh.read(8) != _PNG_MAGIC:
            raise FormatError(f"not a PNG file: {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise IOError(f"could not decode {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise FormatError(f"unsupported PNG sample type {raw.dtype} in {path}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = raw[:, :, :3]
        if raw.shape[2] == 3:
            raw = raw[:, :, ::-1]  # BGR -> RGB
        elif raw.shape[2] != 1:
            raise FormatError(f"unsupported channel count {raw.shape[2]} in {path}")
    return ImagePlane(raw.astype(np.float64) / scale)


def save_image(img: ImagePlane, path: str | os.PathLike) -> None:
    """Write an 8-bit PNG; sample s is stored as round(s * 255) after clamping."""
    arr = np.clip(img.data, 0.0, 1.0)
    arr = np.rint(arr * 255.0).astype(np.uint8)
    if arr.shape[2] == 1:
        arr = arr[:, :, 0]
    else:
        arr = arr[:, :, ::-1]  # RGB -> BGR
    if not cv2.imwrite(str(path), arr):
        raise IOError(f"could not write {path}")


def to_luminance(img: ImagePlane) -> ImagePlane:
    """Rec. 601 luma of an RGB image; 1-channel input is returned unchanged."""
    if img.channels == 1:
        return img
    # weights sum to 1 only up to rounding; clip swallows the stray ulp
    return ImagePlane(np.clip(img.data @ _LUMA_WEIGHTS, 0.0, 1.0))


def luma_field(img: ImagePlane) -> np.ndarray:
    """2-D float64 luminance array, the working format for the metric kernels."""
    return to_luminance(img).data[:, :, 0]
