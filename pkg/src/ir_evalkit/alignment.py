"""Semantic-consistency scoring between a restoration and its inputs.

Two approximations are provided: comparing the restoration against the ground
truth directly (appropriate when little information was destroyed), and
re-running the exact seeded degradation on the restoration and comparing
against the degraded input (appropriate when the ground truth is semantically
far from anything recoverable). Similarity itself is pluggable: a built-in
gradient-histogram descriptor, precomputed external embeddings, or SSIM.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import ImagePlane, luma_field
from .degradation import DegradationSpec, degrade, resize, retention_rate
from .distortion import ssim
from .errors import DimensionError, EmbeddingLookupError, ParameterError

DESCRIPTOR_DIM = 512

BACKEND_BUILTIN = "builtin"
BACKEND_EMBEDDINGS = "embeddings"
BACKEND_SSIM = "ssim"

MODE_GT = "gt-side"
MODE_LQ = "lq-side"

LOWER_BETTER = "lower-better"
HIGHER_BETTER = "higher-better"


def builtin_descriptor(img: ImagePlane) -> np.ndarray:
    """Deterministic 512-dim gradient-orientation descriptor, L2-normalized.

    Luminance is resized to 64x64, per-pixel gradients are binned into 8
    orientation bins over an 8x8 grid of cells, weighted by gradient
    magnitude. A hand-crafted stand-in for a semantic encoder: hermetic and
    fast, with real encoders entering via embedding manifests.
    """
    small = luma_field(resize(img, 64, 64))
    gy, gx = np.gradient(small)
    magnitude = np.hypot(gx, gy)
    orientation = np.arctan2(gy, gx)  # [-pi, pi]
    bins = np.minimum(((orientation + np.pi) / (np.pi / 4.0)).astype(np.int64), 7)

    rows = np.arange(64) // 8
    cell = rows[:, np.newaxis] * 8 + rows[np.newaxis, :]
    slots = cell * 8 + bins
    desc = np.bincount(slots.ravel(), weights=magnitude.ravel(), minlength=DESCRIPTOR_DIM)

    norm = np.linalg.norm(desc)
    if norm == 0.0:
        basis = np.zeros(DESCRIPTOR_DIM)
        basis[0] = 1.0
        return basis
    return desc / norm


def embedding_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine distance 1 - cos(u, v), in [0, 2]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ParameterError(f"vector shape mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ParameterError("cosine distance undefined for zero vectors")
    if np.array_equal(u, v):
        return 0.0
    cos = float(np.dot(u, v) / (nu * nv))
    return 1.0 - max(-1.0, min(1.0, cos))


@dataclass(frozen=True)
class EmbeddingManifest:
    """Precomputed embeddings keyed by image id, all of one dimension."""

    encoder_name: str
    dim: int
    entries: dict = field(repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError(f"embedding dim must be >= 1, got {self.dim}")
        frozen = {}
        for image_id, vec in self.entries.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise ParameterError(
                    f"entry {image_id!r} has shape {arr.shape}, expected ({self.dim},)")
            arr.flags.writeable = False
            frozen[str(image_id)] = arr
        object.__setattr__(self, "entries", frozen)

    def __contains__(self, image_id: str) -> bool:
        return image_id in self.entries

    def vector(self, image_id: str) -> np.ndarray:
        try:
            return self.entries[image_id]
        except KeyError:
            raise EmbeddingLookupError(
                f"no embedding for id {image_id!r} (encoder {self.encoder_name})") from None

    def save(self, path: str | os.PathLike) -> None:
        doc = {
            "version": 1,
            "encoder": self.encoder_name,
            "dim": self.dim,
            "entries": {k: v.tolist() for k, v in sorted(self.entries.items())},
            "meta": self.meta,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "EmbeddingManifest":
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("version") != 1:
            raise ParameterError(f"unsupported embedding manifest version in {path}")
        return cls(
            encoder_name=doc.get("encoder", ""),
            dim=int(doc["dim"]),
            entries=doc["entries"],
            meta=doc.get("meta", {}),
        )


class SemanticBackend:
    """Similarity measure used by the alignment scores.

    kind "builtin": cosine distance between built-in descriptors (lower better).
    kind "embeddings": cosine distance between manifest vectors looked up by
        (role, image id); roles are "gt", "lq", "restored" (higher-degradation
        use re-degrades restorations first, so the restored-role manifest must
        then hold embeddings of the re-degraded images).
    kind "ssim": structural similarity between the two images (higher better).
    """

    def __init__(self, kind: str, manifests: Mapping[str, EmbeddingManifest] | None = None):
        if kind not in (BACKEND_BUILTIN, BACKEND_EMBEDDINGS, BACKEND_SSIM):
            raise ParameterError(f"unknown backend kind {kind!r}")
        if kind == BACKEND_EMBEDDINGS and not manifests:
            raise ParameterError("embeddings backend requires at least one manifest")
        if kind != BACKEND_EMBEDDINGS and manifests:
            raise ParameterError(f"backend {kind!r} takes no manifests")
        self.kind = kind
        self._manifests = dict(manifests) if manifests else {}

    @classmethod
    def builtin(cls) -> "SemanticBackend":
        return cls(BACKEND_BUILTIN)

    @classmethod
    def from_ssim(cls) -> "SemanticBackend":
        return cls(BACKEND_SSIM)

    @classmethod
    def embeddings(
        cls, manifests: EmbeddingManifest | Mapping[str, EmbeddingManifest]
    ) -> "SemanticBackend":
        """A single manifest serves every role; a mapping assigns per role."""
        if isinstance(manifests, EmbeddingManifest):
            manifests = {"gt": manifests, "lq": manifests, "restored": manifests}
        return cls(BACKEND_EMBEDDINGS, manifests)

    @property
    def orientation(self) -> str:
        return HIGHER_BETTER if self.kind == BACKEND_SSIM else LOWER_BETTER

    @property
    def optimum(self) -> float:
        return 1.0 if self.kind == BACKEND_SSIM else 0.0

    def lookup(self, role: str, image_id: str | None) -> np.ndarray:
        if image_id is None:
            raise EmbeddingLookupError(f"embeddings backend needs an image id for role {role!r}")
        manifest = self._manifests.get(role)
        if manifest is None:
            raise EmbeddingLookupError(f"no embedding manifest for role {role!r}")
        return manifest.vector(image_id)

    def compare_images(self, a: ImagePlane, b: ImagePlane, allow_resize: bool) -> float:
        if self.kind == BACKEND_BUILTIN:
            return embedding_distance(builtin_descriptor(a), builtin_descriptor(b))
        if self.kind == BACKEND_SSIM:
            if a.shape != b.shape:
                if not allow_resize:
                    raise DimensionError(
                        f"shape mismatch after degradation: {a.shape} vs {b.shape}")
                # bring the smaller image up to the larger before comparing
                if a.width * a.height < b.width * b.height:
                    a = resize(a, b.width, b.height)
                else:
                    b = resize(b, a.width, a.height)
            return ssim(a, b)
        raise ParameterError("embeddings backend compares ids, not pixels")


@dataclass(frozen=True)
class AlignmentScore:
    value: float
    orientation: str
    mode: str
    backend: str


def align_gt_side(
    restored: ImagePlane,
    gt: ImagePlane,
    backend: SemanticBackend,
    restored_id: str | None = None,
    gt_id: str | None = None,
) -> AlignmentScore:
    """Alignment approximated as similarity between restoration and ground truth."""
    if backend.kind == BACKEND_EMBEDDINGS:
        value = embedding_distance(
            backend.lookup("restored", restored_id), backend.lookup("gt", gt_id))
    else:
        value = backend.compare_images(restored, gt, allow_resize=True)
    return AlignmentScore(value, backend.orientation, MODE_GT, backend.kind)


def align_lq_side(
    restored: ImagePlane,
    lq: ImagePlane,
    spec: DegradationSpec,
    backend: SemanticBackend,
    degraded_id: str | None = None,
    lq_id: str | None = None,
) -> AlignmentScore:
    """Alignment via re-degradation: apply the seeded spec that produced lq to
    the restoration, then compare against lq under equal conditions.

    With the embeddings backend the re-degraded restoration cannot be encoded
    in-process; its embedding is looked up under degraded_id in the
    restored-role manifest instead.
    """
    if backend.kind == BACKEND_EMBEDDINGS:
        value = embedding_distance(
            backend.lookup("restored", degraded_id), backend.lookup("lq", lq_id))
    else:
        redegraded = degrade(restored, spec)
        value = backend.compare_images(redegraded, lq, allow_resize=False)
    return AlignmentScore(value, backend.orientation, MODE_LQ, backend.kind)


def align_auto(
    restored: ImagePlane,
    gt: ImagePlane,
    lq: ImagePlane,
    spec: DegradationSpec,
    backend: SemanticBackend,
    gamma_threshold: float = 0.5,
    restored_id: str | None = None,
    gt_id: str | None = None,
    lq_id: str | None = None,
    degraded_id: str | None = None,
) -> AlignmentScore:
    """Pick the comparison side from the information retention rate: at or
    above gamma_threshold the ground truth is trusted, below it the seeded
    re-degradation path is used."""
    if retention_rate(spec) >= gamma_threshold:
        return align_gt_side(restored, gt, backend, restored_id, gt_id)
    return align_lq_side(restored, lq, spec, backend, degraded_id, lq_id)
