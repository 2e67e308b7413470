"""No-reference perceptual quality: a self-contained NIQE implementation.

Feature vectors are plain float64 arrays of length 36: for each of two scales,
a generalized-Gaussian fit of the locally normalized luminance field (shape,
variance) plus asymmetric fits of the four neighbor-product fields (shape,
mean, left variance, right variance). A pristine model is the mean and
covariance of those vectors over sharp patches of a clean corpus; an image is
scored by the Mahalanobis-style distance between its own patch statistics and
the pristine ones.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.ndimage import correlate1d
from scipy.special import gammaln

from .core import ImagePlane, to_luminance
from .errors import (
    DegenerateInputError,
    DimensionError,
    InsufficientDataError,
    ParameterError,
)

FEATURE_DIM = 36

# Shape-parameter grid shared by the GGD and AGGD fits.
SHAPE_GRID = np.linspace(0.2, 10.0, 9801)
_GRID_RATIO = np.exp(
    2.0 * gammaln(2.0 / SHAPE_GRID) - gammaln(1.0 / SHAPE_GRID) - gammaln(3.0 / SHAPE_GRID)
)

_MSCN_WINDOW_SIZE = 7
_MSCN_SIGMA = 7.0 / 6.0


def _gamma(x: float) -> float:
    return math.exp(gammaln(x))


def mscn(img: ImagePlane) -> tuple[np.ndarray, np.ndarray]:
    """Mean-subtracted contrast-normalized coefficients and the local-sigma field.

    Input must be single-channel; it is rescaled to [0, 255] internally, which
    is the range the +1 stabilizer in the denominator assumes.
    """
    if img.channels != 1:
        raise DimensionError(f"mscn expects a luminance image, got {img.channels} channels")
    x = img.data[:, :, 0] * 255.0
    radius = _MSCN_WINDOW_SIZE // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(offsets**2) / (2.0 * _MSCN_SIGMA**2))
    w /= w.sum()

    def smooth(f):
        out = correlate1d(f, w, axis=0, mode="mirror")
        return correlate1d(out, w, axis=1, mode="mirror")

    mu = smooth(x)
    second = smooth(x * x)
    sigma = np.sqrt(np.maximum(second - mu * mu, 0.0))
    return (x - mu) / (sigma + 1.0), sigma


def _moment_ratio(samples: np.ndarray) -> tuple[float, float]:
    """(mean |x|)^2 / mean(x^2) plus the raw second moment; rejects dead input."""
    second = float(np.mean(samples * samples))
    if second == 0.0:
        raise DegenerateInputError("all-zero samples carry no distribution shape")
    mean_abs = float(np.mean(np.abs(samples)))
    return mean_abs * mean_abs / second, second


def fit_ggd(samples: np.ndarray) -> tuple[float, float]:
    """Moment-matched generalized Gaussian fit, returning (shape, variance)."""
    samples = np.ravel(np.asarray(samples, dtype=np.float64))
    if samples.size < 100:
        raise ParameterError(f"need >= 100 samples for a stable fit, got {samples.size}")
    rhat, second = _moment_ratio(samples)
    shape = float(SHAPE_GRID[np.argmin(np.abs(_GRID_RATIO - rhat))])
    return shape, second


class AggdFit(NamedTuple):
    shape: float
    mean: float
    left_var: float
    right_var: float
    one_sided: bool


def fit_aggd(samples: np.ndarray) -> AggdFit:
    """Moment-matched asymmetric generalized Gaussian fit.

    One-signed inputs are fitted with the missing side's sigma pinned to 1e-6
    and flagged rather than rejected.
    """
    samples = np.ravel(np.asarray(samples, dtype=np.float64))
    if samples.size < 100:
        raise ParameterError(f"need >= 100 samples for a stable fit, got {samples.size}")
    rhat, _ = _moment_ratio(samples)

    eps = 1e-6
    neg = samples[samples < 0]
    pos = samples[samples > 0]
    one_sided = neg.size == 0 or pos.size == 0
    sigma_l = math.sqrt(float(np.mean(neg * neg))) if neg.size else eps
    sigma_r = math.sqrt(float(np.mean(pos * pos))) if pos.size else eps

    gamma_hat = sigma_l / sigma_r
    rhat_norm = rhat * (gamma_hat**3 + 1.0) * (gamma_hat + 1.0) / (gamma_hat**2 + 1.0) ** 2
    shape = float(SHAPE_GRID[np.argmin(np.abs(_GRID_RATIO - rhat_norm))])
    mean = (
        (sigma_r - sigma_l)
        * (_gamma(2.0 / shape) / _gamma(1.0 / shape))
        * math.sqrt(_gamma(1.0 / shape) / _gamma(3.0 / shape))
    )
    return AggdFit(shape, mean, sigma_l**2, sigma_r**2, one_sided)


# Neighbor-product orientations: horizontal, vertical, main diag, anti diag.
_SHIFTS = ((0, 1), (1, 0), (1, 1), (1, -1))


def _patch_features(patch: np.ndarray) -> list[float]:
    """18 scalars for one MSCN patch: GGD pair + four AGGD quadruples."""
    shape, variance = fit_ggd(patch)
    feats = [shape, variance]
    for shift in _SHIFTS:
        product = patch * np.roll(patch, shift, axis=(0, 1))
        fit = fit_aggd(product)
        feats.extend([fit.shape, fit.mean, fit.left_var, fit.right_var])
    return feats


def _half_scale(x: np.ndarray) -> np.ndarray:
    """2x2 box filter followed by 2x decimation (dims must be even)."""
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def extract_features(
    img: ImagePlane,
    patch_size: int = 96,
    sharpness_fraction: float = 0.75,
) -> np.ndarray:
    """Per-patch feature matrix of shape (n_kept_patches, 36).

    The image is cropped to a multiple of patch_size and must then still hold
    at least two patches per dimension. Patch sharpness is the mean of the
    local-sigma field; only patches at >= sharpness_fraction of the sharpest
    patch are kept (pass 0.0 to keep everything, as scoring does).
    """
    if img.channels != 1:
        raise DimensionError(
            f"extract_features expects a luminance image, got {img.channels} channels")
    h = (img.height // patch_size) * patch_size
    w = (img.width // patch_size) * patch_size
    if h < 2 * patch_size or w < 2 * patch_size:
        raise DimensionError(
            f"image {img.width}x{img.height} too small: need >= 2 patches of "
            f"{patch_size} per dimension after cropping")
    cropped = img.data[:h, :w, 0]

    mscn_1, sigma_1 = mscn(ImagePlane(cropped))
    mscn_2, _ = mscn(ImagePlane(_half_scale(cropped)))

    n_rows = h // patch_size
    n_cols = w // patch_size
    half = patch_size // 2

    sharpness = np.empty((n_rows, n_cols))
    for i in range(n_rows):
        for j in range(n_cols):
            block = sigma_1[i * patch_size:(i + 1) * patch_size,
                            j * patch_size:(j + 1) * patch_size]
            sharpness[i, j] = block.mean()
    threshold = sharpness_fraction * sharpness.max()

    rows = []
    for i in range(n_rows):
        for j in range(n_cols):
            if sharpness[i, j] < threshold:
                continue
            p1 = mscn_1[i * patch_size:(i + 1) * patch_size,
                        j * patch_size:(j + 1) * patch_size]
            p2 = mscn_2[i * half:(i + 1) * half, j * half:(j + 1) * half]
            rows.append(_patch_features(p1) + _patch_features(p2))
    return np.array(rows, dtype=np.float64)


@dataclass(frozen=True)
class PristineModel:
    """Multivariate-Gaussian model of pristine-image features."""

    mean: np.ndarray = field(repr=False)
    cov: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.shape != (FEATURE_DIM,) or cov.shape != (FEATURE_DIM, FEATURE_DIM):
            raise ParameterError(
                f"expected mean ({FEATURE_DIM},) and cov {FEATURE_DIM}x{FEATURE_DIM}, "
                f"got {mean.shape} and {cov.shape}")
        if not np.allclose(cov, cov.T, atol=1e-9, rtol=0.0):
            raise ParameterError("covariance is not symmetric")
        eigvals = np.linalg.eigvalsh(cov)
        if eigvals.min() < -1e-8:
            raise ParameterError(f"covariance has eigenvalue {eigvals.min()} < -1e-8")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def save(self, path: str | os.PathLike) -> None:
        doc = {
            "version": 1,
            "dim": FEATURE_DIM,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "meta": self.meta,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PristineModel":
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("version") != 1 or doc.get("dim") != FEATURE_DIM:
            raise ParameterError(f"unsupported pristine model file {path}")
        return cls(np.array(doc["mean"]), np.array(doc["cov"]), doc.get("meta", {}))


def train_pristine(
    corpus: Sequence[ImagePlane],
    corpus_name: str = "",
    patch_size: int = 96,
    sharpness_fraction: float = 0.75,
) -> PristineModel:
    """Fit the pristine model on a clean corpus (>= 10 images)."""
    if len(corpus) < 10:
        raise InsufficientDataError(f"need >= 10 pristine images, got {len(corpus)}")
    pooled = [
        extract_features(to_luminance(img), patch_size, sharpness_fraction)
        for img in corpus
    ]
    feats = np.vstack(pooled)
    if feats.shape[0] < FEATURE_DIM + 1:
        raise InsufficientDataError(
            f"only {feats.shape[0]} patches pooled; need > {FEATURE_DIM} for a "
            "full-rank covariance")
    mean = feats.mean(axis=0)
    cov = np.cov(feats, rowvar=False, ddof=1)
    meta = {"corpus": corpus_name, "images": len(corpus), "patches": int(feats.shape[0])}
    return PristineModel(mean, cov, meta)


def score_from_moments(mean: np.ndarray, cov: np.ndarray, model: PristineModel) -> float:
    """Distance between a test feature distribution and the pristine model."""
    diff = model.mean - np.asarray(mean, dtype=np.float64)
    pooled = (model.cov + np.asarray(cov, dtype=np.float64)) / 2.0
    inv = np.linalg.pinv(pooled, rcond=1e-10, hermitian=True)
    return math.sqrt(max(float(diff @ inv @ diff), 0.0))


def niqe_score(img: ImagePlane, model: PristineModel, patch_size: int = 96) -> float:
    """NIQE-style score (lower is better) against a pristine model.

    Unlike training, scoring uses every patch: sharpness filtering would let a
    degraded image hide its own blur.
    """
    feats = extract_features(to_luminance(img), patch_size, sharpness_fraction=0.0)
    mean = feats.mean(axis=0)
    cov = np.cov(feats, rowvar=False, ddof=1)
    return score_from_moments(mean, cov, model)
