"""Batched embedding export into the evaluation toolkit's manifest JSON:

    {"version": 1, "encoder": "<name>", "dim": D,
     "entries": {"<image-id>": [D floats], ...},
     "meta": {...preprocessing, skipped images...}}

Image ids are relative paths without extension, matching the harness
convention, so an export over a tree of per-model restoration directories
yields ids like "model/0001".
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np
import torch

from .encoders import CROP_TO, NORM_MEAN, NORM_STD, RESIZE_TO, build_encoder

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")


@dataclass
class ExportConfig:
    encoder_name: str
    image_dir: Path
    output_path: Path
    device: str = "cpu"
    batch_size: int = 8
    extensions: tuple = IMAGE_EXTENSIONS

    def __post_init__(self):
        self.image_dir = Path(self.image_dir)
        self.output_path = Path(self.output_path)
        if not self.image_dir.is_dir():
            raise NotADirectoryError(f"image directory not found: {self.image_dir}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")


@dataclass
class ExportResult:
    entries: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)


def _read_image(path: Path) -> torch.Tensor | None:
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        return None
    if raw.dtype == np.uint16:
        arr = raw.astype(np.float32) / 65535.0
    else:
        arr = raw.astype(np.float32) / 255.0
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=-1)
    elif arr.shape[2] == 4:
        arr = arr[:, :, :3]
    arr = arr[:, :, ::-1].copy()  # BGR -> RGB
    return torch.from_numpy(arr).permute(2, 0, 1)


def export_embeddings(config: ExportConfig) -> ExportResult:
    encoder = build_encoder(config.encoder_name, config.device)

    paths = sorted(
        p for p in config.image_dir.rglob("*")
        if p.suffix.lower() in config.extensions and p.is_file()
    )
    result = ExportResult()
    batch_paths: list[Path] = []
    batch_tensors: list[torch.Tensor] = []

    def flush():
        if not batch_tensors:
            return
        vectors = encoder(torch.stack(batch_tensors)).double().numpy()
        for path, vec in zip(batch_paths, vectors):
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec = vec / norm
            image_id = path.relative_to(config.image_dir).with_suffix("").as_posix()
            result.entries[image_id] = vec
        batch_paths.clear()
        batch_tensors.clear()

    for path in paths:
        tensor = _read_image(path)
        if tensor is None:
            rel = path.relative_to(config.image_dir).as_posix()
            print(f"warning: skipping unreadable image {rel}", file=sys.stderr)
            result.skipped.append(rel)
            continue
        batch_paths.append(path)
        batch_tensors.append(tensor)
        if len(batch_tensors) >= config.batch_size:
            flush()
    flush()

    doc = {
        "version": 1,
        "encoder": getattr(encoder, "name", config.encoder_name),
        "dim": int(encoder.dim),
        "entries": {k: v.tolist() for k, v in sorted(result.entries.items())},
        "meta": {
            "preprocessing": {
                "resize_shorter_side": RESIZE_TO,
                "center_crop": CROP_TO,
                "normalize_mean": list(NORM_MEAN),
                "normalize_std": list(NORM_STD),
            },
            "image_dir": config.image_dir.name,
            "count": len(result.entries),
            "skipped": result.skipped,
        },
    }
    config.output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(config.output_path, "w") as fh:
        json.dump(doc, fh)
    return result
