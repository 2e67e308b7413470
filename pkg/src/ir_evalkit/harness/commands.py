"""The five batch commands behind the CLI.

All commands are deterministic given manifest + seeds: reruns produce
byte-identical outputs. Exit codes: 0 clean, 1 when any entry failed or was
skipped, 2 for usage/manifest problems (raised as ManifestError and mapped by
the CLI).
"""
from __future__ import annotations

import json
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

from ..alignment import EmbeddingManifest, SemanticBackend
from ..analysis import (
    GroupSummary,
    aggregate_by_model,
    degradation_sweep,
    evaluate_triple,
    pareto_front,
    resource_report,
)
from ..core import load_image, save_image
from ..degradation import DegradationSpec, degrade
from ..errors import EvalkitError, ManifestError
from ..perception import PristineModel, train_pristine
from .manifest import AlignmentConfig, DatasetManifest, load_manifest
from . import reports

DEFAULT_SWEEP_SIGMAS = (1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0)


def _say(msg: str) -> None:
    print(msg)


def _warn(msg: str) -> None:
    print(msg, file=sys.stderr)


def build_backend(config: AlignmentConfig, root: Path) -> SemanticBackend:
    if config.backend == "builtin":
        return SemanticBackend.builtin()
    if config.backend == "ssim":
        return SemanticBackend.from_ssim()
    if config.backend == "embeddings":
        if not config.embedding_paths:
            raise ManifestError("embeddings backend needs alignment.embeddings paths")
        manifests = {}
        for role, rel in config.embedding_paths.items():
            if role not in ("gt", "lq", "restored"):
                raise ManifestError(f"unknown embedding role {role!r}")
            manifests[role] = EmbeddingManifest.load(root / rel)
        return SemanticBackend.embeddings(manifests)
    raise ManifestError(f"unknown alignment backend {config.backend!r}")


def _map_units(units: Sequence, fn, jobs: int) -> list:
    if jobs <= 1:
        return [fn(u) for u in units]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, units))  # order-stable regardless of scheduling


def cmd_degrade(manifest_path: str, out_dir: str, base_seed: int, jobs: int = 1) -> int:
    """Synthesize LQ images for every entry and write the updated manifest."""
    manifest = load_manifest(manifest_path, base_seed)
    out = Path(out_dir).resolve()
    out.mkdir(parents=True, exist_ok=True)

    def work(entry):
        try:
            gt = load_image(entry.gt_path)
            lq = degrade(gt, entry.spec)
            lq_path = out / f"{entry.image_id}.png"
            lq_path.parent.mkdir(parents=True, exist_ok=True)
            save_image(lq, lq_path)
            entry.lq_path = lq_path
            return None
        except (EvalkitError, OSError) as exc:
            return f"{entry.image_id}: {exc}"

    failures = [f for f in _map_units(manifest.entries, work, jobs) if f]
    # paths in the rewritten manifest are relative to its new location
    manifest.root = out
    manifest.save(out / "manifest.json")
    for failure in failures:
        _warn(f"degrade failed for {failure}")
    done = len(manifest.entries) - len(failures)
    _say(f"degraded {done}/{len(manifest.entries)} entries -> {out}")
    return 1 if failures else 0


def cmd_train_niqe(corpus_dir: str, out_path: str) -> int:
    """Train the pristine perception model on a directory of PNG images."""
    paths = sorted(Path(corpus_dir).rglob("*.png"))
    if len(paths) < 10:
        raise ManifestError(
            f"pristine training needs >= 10 images, found {len(paths)} in {corpus_dir}")
    corpus = [load_image(p) for p in paths]
    model = train_pristine(corpus, corpus_name=Path(corpus_dir).name)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    model.save(out_path)
    _say(f"trained pristine model on {len(corpus)} images "
         f"({model.meta['patches']} patches) -> {out_path}")
    return 0


def cmd_evaluate(
    manifest_path: str,
    pristine_path: str,
    out_dir: str,
    backend_override: str | None = None,
    gamma_threshold: float | None = None,
    force_mode: str | None = None,
    base_seed: int = 0,
    jobs: int = 1,
) -> int:
    """Evaluate every (entry, model) pair and emit records CSV + summary JSON."""
    manifest = load_manifest(manifest_path, base_seed)
    pristine = PristineModel.load(pristine_path)
    config = manifest.alignment
    if backend_override:
        config.backend = backend_override
    if gamma_threshold is not None:
        config.gamma_threshold = gamma_threshold
    if force_mode is not None:
        config.force_mode = force_mode
    backend = build_backend(config, manifest.root)

    units = [
        (entry, model, path)
        for entry in manifest.entries
        for model, path in sorted(entry.restorations.items())
    ]
    if not units:
        raise ManifestError("manifest lists no restorations to evaluate")

    def work(unit):
        entry, model, restored_path = unit
        key = (entry.image_id, model)
        if not Path(restored_path).is_file():
            return key, None, f"missing restoration {restored_path}"
        try:
            gt = load_image(entry.gt_path)
            if entry.lq_path is not None:
                lq = load_image(entry.lq_path)
            else:
                lq = degrade(gt, entry.spec)
            restored = load_image(restored_path)
            ids = {
                "gt": entry.image_id,
                "lq": entry.image_id,
                "restored": f"{model}/{entry.image_id}",
                "degraded": f"{model}/{entry.image_id}",
            }
            record = evaluate_triple(
                entry.image_id, model, gt, lq, restored, entry.spec,
                pristine, backend, config.gamma_threshold, config.force_mode, ids)
            return key, record, None
        except (EvalkitError, OSError) as exc:
            return key, None, str(exc)

    results = _map_units(units, work, jobs)
    records = [r for _, r, _ in results if r is not None]
    skipped = [
        {"image_id": key[0], "model": key[1], "reason": reason}
        for key, record, reason in results if record is None
    ]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports.write_records_csv(records, out / "records.csv")

    summaries = aggregate_by_model(records) if records else []
    summary_doc = {
        "task_name": manifest.task_name,
        "backend": config.backend,
        "gamma_threshold": config.gamma_threshold,
        "force_mode": config.force_mode,
        "models": {
            s.model_name: {
                "count": s.count,
                "psnr_capped": s.psnr_capped_count,
                "alignment_modes": s.alignment_modes,
                **{k: v for k, v in sorted(s.means.items())},
            }
            for s in summaries
        },
        "best": _best_per_column(summaries),
        "skipped": skipped,
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary_doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _say(reports.summary_table(summaries))
    for item in skipped:
        _warn(f"skipped {item['image_id']}/{item['model']}: {item['reason']}")
    _say(f"wrote {len(records)} records -> {out / 'records.csv'}")
    return 1 if skipped else 0


def _best_per_column(summaries: Sequence[GroupSummary]) -> dict:
    if not summaries:
        return {}
    lower_alignment = summaries[0].alignment_backend != "ssim"
    best = {}
    for key, lower in (("alignment", lower_alignment), ("ssim", False),
                       ("psnr", False), ("niqe", True)):
        pick = min if lower else max
        best[key] = pick(summaries, key=lambda s: s.means[key]).model_name
    return best


def cmd_sweep(
    manifest_path: str,
    out_dir: str,
    sigmas: Sequence[float] = DEFAULT_SWEEP_SIGMAS,
    pristine_path: str | None = None,
    backend_override: str | None = None,
    base_seed: int = 0,
    jobs: int = 1,
) -> int:
    """Identity-restorer metric curves over a grid of blur levels."""
    manifest = load_manifest(manifest_path, base_seed)
    corpus = [load_image(e.gt_path) for e in manifest.entries]
    pristine = PristineModel.load(pristine_path) if pristine_path else None
    config = manifest.alignment
    if backend_override:
        config.backend = backend_override
    backend = build_backend(config, manifest.root) if config.backend != "embeddings" else None

    levels = [DegradationSpec(blur_sigma=s, seed=base_seed) for s in sigmas]
    rows = degradation_sweep(
        corpus, levels, pristine=pristine, backend=backend,
        gamma_threshold=config.gamma_threshold)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports.write_sweep_csv(rows, out / "sweep.csv")
    reports.write_sweep_svg(rows, out / "sweep.svg")
    _say(f"swept {len(levels)} levels x {len(corpus)} images -> {out / 'sweep.csv'}")
    return 0


def _front_subset(
    rows: list[tuple[str, float, float]], normalized: list[tuple[float, float]]
) -> list[tuple[str, float, float]]:
    """Rows whose normalized point survives Pareto filtering (ties preserved)."""
    budget = Counter(pareto_front(normalized))
    kept = []
    for row, point in zip(rows, normalized):
        if budget[point] > 0:
            budget[point] -= 1
            kept.append(row)
    return kept


def cmd_tradeoff(records_path: str, out_dir: str, metas: dict | None = None) -> int:
    """Tradeoff planes, Pareto fronts, and the optional resource table."""
    records = reports.read_records_csv(records_path)
    if not records:
        raise ManifestError(f"no records in {records_path}")
    summaries = aggregate_by_model(records)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    # perception-distortion plane: both axes lower-better after d = 1 - SSIM
    pd_rows = [(s.model_name, 1.0 - s.means["ssim"], s.means["niqe"]) for s in summaries]
    pd_front = _front_subset(pd_rows, [(x, y) for _, x, y in pd_rows])
    reports.write_plane_csv(pd_rows, ("one_minus_ssim", "niqe"), out / "plane_pd.csv")
    reports.write_plane_csv(pd_front, ("one_minus_ssim", "niqe"), out / "pareto_pd.csv")
    reports.write_scatter_svg(
        pd_rows, [(x, y) for _, x, y in pd_front],
        "perception-distortion", "1 - ssim", "niqe", out / "tradeoff_pd.svg")

    # alignment-perception plane: flip alignment when its backend is higher-better
    higher = records[0].alignment_backend == "ssim"
    ap_rows = [(s.model_name, s.means["alignment"], s.means["niqe"]) for s in summaries]
    ap_norm = [((1.0 - x) if higher else x, y) for _, x, y in ap_rows]
    ap_front = _front_subset(ap_rows, ap_norm)
    reports.write_plane_csv(ap_rows, ("alignment", "niqe"), out / "plane_ap.csv")
    reports.write_plane_csv(ap_front, ("alignment", "niqe"), out / "pareto_ap.csv")
    reports.write_scatter_svg(
        ap_rows, [(x, y) for _, x, y in ap_front],
        "alignment-perception", "alignment", "niqe", out / "tradeoff_ap.svg")

    if metas is not None:
        rows = resource_report(summaries, metas)
        reports.write_resource_csv(rows, out / "resource.csv")

    _say(f"tradeoff reports for {len(summaries)} models -> {out}")
    return 0
