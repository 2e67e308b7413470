"""Dataset manifest: the JSON file that drives batch commands.

Schema (paths are resolved relative to the manifest file's directory):

    {
      "version": 1,
      "task_name": "SR2",
      "alignment": {
        "backend": "builtin",                # builtin | embeddings | ssim
        "gamma_threshold": 0.5,
        "force_mode": null,                  # null | "gt" | "lq"
        "embeddings": {"gt": "...", "lq": "...", "restored": "..."}
      },
      "entries": [
        {
          "image_id": "0001",
          "gt_path": "gt/0001.png",
          "lq_path": "lq/0001.png",          # optional; synthesized on demand
          "spec": {"blur_sigma": 0.0, "downsample_alpha": 2.0,
                   "noise_beta": 0.0, "seed": 7},
          "restorations": {"identity": "restored/identity/0001.png"}
        }
      ],
      "models_meta": {"identity": {"param_count": 1, "latency_ms": 0.1}}
    }

Entries whose spec omits "seed" get one derived deterministically from the
base seed and the image id, so reruns stay byte-identical.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..analysis import ModelMeta
from ..degradation import DegradationSpec
from ..errors import ManifestError

ENV_SEED = "IR_EVALKIT_SEED"


def derive_seed(base_seed: int, image_id: str) -> int:
    """Stable 63-bit per-image seed mixed from a base seed and the image id."""
    digest = hashlib.blake2b(
        image_id.encode("utf-8"),
        digest_size=8,
        key=int(base_seed).to_bytes(8, "little", signed=False),
    ).digest()
    return int.from_bytes(digest, "little") >> 1


def resolve_base_seed(cli_seed: int | None) -> int:
    """--seed flag wins, then the IR_EVALKIT_SEED env var, then 0."""
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ManifestError(f"{ENV_SEED} must be an integer, got {env!r}") from None
    return 0


@dataclass
class AlignmentConfig:
    backend: str = "builtin"
    gamma_threshold: float = 0.5
    force_mode: str | None = None
    embedding_paths: dict = field(default_factory=dict)  # role -> path

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "gamma_threshold": self.gamma_threshold,
            "force_mode": self.force_mode,
            "embeddings": dict(self.embedding_paths),
        }


@dataclass
class ManifestEntry:
    image_id: str
    gt_path: Path
    spec: DegradationSpec
    lq_path: Path | None = None
    restorations: dict = field(default_factory=dict)  # model name -> Path

    def to_dict(self, root: Path) -> dict:
        doc = {
            "image_id": self.image_id,
            "gt_path": _relative(self.gt_path, root),
            "spec": self.spec.to_dict(),
            "restorations": {
                m: _relative(p, root) for m, p in sorted(self.restorations.items())
            },
        }
        if self.lq_path is not None:
            doc["lq_path"] = _relative(self.lq_path, root)
        return doc


def _relative(path: Path, root: Path) -> str:
    try:
        return path.relative_to(root).as_posix()
    except ValueError:
        return path.as_posix()


@dataclass
class DatasetManifest:
    root: Path
    task_name: str = ""
    alignment: AlignmentConfig = field(default_factory=AlignmentConfig)
    entries: list = field(default_factory=list)
    models_meta: dict = field(default_factory=dict)  # model name -> ModelMeta

    def entry_ids(self) -> list[str]:
        return [e.image_id for e in self.entries]

    def to_dict(self) -> dict:
        doc = {
            "version": 1,
            "task_name": self.task_name,
            "alignment": self.alignment.to_dict(),
            "entries": [e.to_dict(self.root) for e in self.entries],
        }
        if self.models_meta:
            doc["models_meta"] = {
                name: {"param_count": meta.param_count, "latency_ms": meta.latency_ms}
                for name, meta in sorted(self.models_meta.items())
            }
        return doc

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def load_manifest(path: str | os.PathLike, base_seed: int = 0) -> DatasetManifest:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from None
    if doc.get("version") != 1:
        raise ManifestError(f"unsupported manifest version in {path}")

    # absolute root so paths serialized into a rewritten manifest stay valid
    root = path.parent.resolve()
    align_doc = doc.get("alignment", {})
    alignment = AlignmentConfig(
        backend=align_doc.get("backend", "builtin"),
        gamma_threshold=float(align_doc.get("gamma_threshold", 0.5)),
        force_mode=align_doc.get("force_mode"),
        embedding_paths=dict(align_doc.get("embeddings", {})),
    )
    if alignment.force_mode not in (None, "gt", "lq"):
        raise ManifestError(f"force_mode must be 'gt' or 'lq', got {alignment.force_mode!r}")

    entries = []
    seen_ids = set()
    for raw in doc.get("entries", []):
        if "gt_path" not in raw:
            raise ManifestError(f"entry without gt_path in {path}")
        gt_path = root / raw["gt_path"]
        image_id = raw.get("image_id") or Path(raw["gt_path"]).with_suffix("").as_posix()
        if image_id in seen_ids:
            raise ManifestError(f"duplicate image_id {image_id!r} in {path}")
        seen_ids.add(image_id)
        if "spec" not in raw:
            raise ManifestError(f"entry {image_id!r} has no degradation spec")
        spec_doc = dict(raw["spec"])
        if "seed" not in spec_doc:
            spec_doc["seed"] = derive_seed(base_seed, image_id)
        entries.append(ManifestEntry(
            image_id=image_id,
            gt_path=gt_path,
            spec=DegradationSpec.from_dict(spec_doc),
            lq_path=(root / raw["lq_path"]) if raw.get("lq_path") else None,
            restorations={m: root / p for m, p in raw.get("restorations", {}).items()},
        ))
    if not entries:
        raise ManifestError(f"manifest {path} has no entries")

    metas = {}
    for name, raw in doc.get("models_meta", {}).items():
        metas[name] = ModelMeta(
            model_name=name,
            param_count=int(raw["param_count"]),
            latency_ms=float(raw["latency_ms"]) if raw.get("latency_ms") is not None else None,
        )

    return DatasetManifest(
        root=root,
        task_name=doc.get("task_name", ""),
        alignment=alignment,
        entries=sorted(entries, key=lambda e: e.image_id),
        models_meta=metas,
    )
