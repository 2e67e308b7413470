"""Tradeoff analytics over per-image evaluation records.

Orientation bookkeeping: reports keep every metric in its native orientation;
only Pareto extraction normalizes to lower-better (distortion as 1 - SSIM,
perception as the raw no-reference score).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .alignment import SemanticBackend, align_auto, align_gt_side, align_lq_side
from .core import ImagePlane
from .degradation import DegradationSpec, degrade, resize
from .distortion import psnr, ssim
from .errors import ManifestError, ParameterError
from .perception import PristineModel, niqe_score

# Infinite PSNR is stored as this sentinel (flagged) to keep reports numeric.
PSNR_CAP = 99.0


@dataclass(frozen=True)
class EvaluationRecord:
    """Full metric vector for one (ground truth, degraded, restoration) triple."""

    image_id: str
    model_name: str
    spec: DegradationSpec
    psnr: float
    psnr_capped: bool
    ssim: float
    niqe: float
    alignment_value: float
    alignment_mode: str
    alignment_backend: str

    def __post_init__(self):
        for name in ("psnr", "ssim", "niqe", "alignment_value"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite, got {getattr(self, name)}")


@dataclass(frozen=True)
class ModelMeta:
    model_name: str
    param_count: int
    latency_ms: float | None = None

    def __post_init__(self):
        if self.param_count <= 0:
            raise ParameterError(f"param_count must be > 0, got {self.param_count}")
        if self.latency_ms is not None and self.latency_ms <= 0:
            raise ParameterError(f"latency_ms must be > 0, got {self.latency_ms}")


def cap_psnr(value: float) -> tuple[float, bool]:
    """Map the infinite-PSNR sentinel onto the numeric cap, with a flag."""
    if math.isinf(value):
        return PSNR_CAP, True
    return value, False


@dataclass(frozen=True)
class GroupSummary:
    model_name: str
    # degradation setting without the seed; seeds vary per image inside a group
    spec_key: tuple[float, float, float] | None
    count: int
    means: dict = field(repr=False)
    psnr_capped_count: int = 0
    alignment_modes: str = ""
    alignment_backend: str = ""


def _summarize(model: str, key, group: list[EvaluationRecord]) -> GroupSummary:
    clean_psnr = [r.psnr for r in group if not r.psnr_capped]
    means = {
        "psnr": sum(clean_psnr) / len(clean_psnr) if clean_psnr else PSNR_CAP,
        "ssim": sum(r.ssim for r in group) / len(group),
        "niqe": sum(r.niqe for r in group) / len(group),
        "alignment": sum(r.alignment_value for r in group) / len(group),
    }
    return GroupSummary(
        model_name=model,
        spec_key=key,
        count=len(group),
        means=means,
        psnr_capped_count=sum(1 for r in group if r.psnr_capped),
        alignment_modes="+".join(sorted({r.alignment_mode for r in group})),
        alignment_backend=group[0].alignment_backend,
    )


def aggregate(records: Sequence[EvaluationRecord]) -> list[GroupSummary]:
    """Mean of each metric grouped by (model, degradation setting)."""
    if not records:
        raise ParameterError("cannot aggregate an empty record set")
    groups: dict = {}
    for r in records:
        key = (r.model_name, (r.spec.blur_sigma, r.spec.downsample_alpha, r.spec.noise_beta))
        groups.setdefault(key, []).append(r)
    return [
        _summarize(model, spec_key, group)
        for (model, spec_key), group in sorted(groups.items())
    ]


def aggregate_by_model(records: Sequence[EvaluationRecord]) -> list[GroupSummary]:
    """Mean of each metric per model, collapsing degradation settings."""
    if not records:
        raise ParameterError("cannot aggregate an empty record set")
    groups: dict = {}
    for r in records:
        groups.setdefault(r.model_name, []).append(r)
    return [_summarize(model, None, group) for model, group in sorted(groups.items())]


def pareto_front(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Non-dominated subset of lower-better (x, y) points, sorted by x.

    A point is dominated when another is <= in both coordinates and strictly <
    in at least one; exact duplicates survive together.
    """
    for x, y in points:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParameterError(f"non-finite coordinate ({x}, {y})")
    front: list[tuple[float, float]] = []
    best_y = math.inf
    first_x_at_best = math.inf
    for x, y in sorted(points):
        if y < best_y:
            best_y = y
            first_x_at_best = x
            front.append((x, y))
        elif y == best_y and x == first_x_at_best:
            front.append((x, y))  # exact tie with the current corner point
    return front


@dataclass(frozen=True)
class SweepRow:
    level: float
    metric: str
    mean: float
    count: int


def _level_values(levels: Sequence[DegradationSpec]) -> list[float]:
    """The varying parameter of a sweep, for the x axis of its curves."""
    sigmas = {s.blur_sigma for s in levels}
    alphas = {s.downsample_alpha for s in levels}
    betas = {s.noise_beta for s in levels}
    if len(alphas) == 1 and len(betas) == 1:
        return [s.blur_sigma for s in levels]
    if len(sigmas) == 1 and len(betas) == 1:
        return [s.downsample_alpha for s in levels]
    if len(sigmas) == 1 and len(alphas) == 1:
        return [s.noise_beta for s in levels]
    return [float(i) for i in range(len(levels))]


def degradation_sweep(
    gt_corpus: Sequence[ImagePlane],
    levels: Sequence[DegradationSpec],
    restorer_outputs: Mapping[int, Sequence[ImagePlane]] | None = None,
    pristine: PristineModel | None = None,
    backend: SemanticBackend | None = None,
    gamma_threshold: float = 0.5,
) -> list[SweepRow]:
    """Metric curves over a grid of degradation levels.

    restorer_outputs maps level index -> restorations (one per corpus image);
    when omitted the identity restorer (output = degraded input) is used.
    NIQE rows appear only with a pristine model, alignment rows only with a
    backend. Restorations are compared at ground-truth size.
    """
    if not gt_corpus:
        raise ParameterError("empty ground-truth corpus")
    rows: list[SweepRow] = []
    for index, (level, level_value) in enumerate(zip(levels, _level_values(levels))):
        if restorer_outputs is not None:
            if index not in restorer_outputs:
                raise ManifestError(f"no restorer outputs for level index {index}")
            outputs = restorer_outputs[index]
            if len(outputs) != len(gt_corpus):
                raise ManifestError(
                    f"level {index}: {len(outputs)} outputs for {len(gt_corpus)} images")
        else:
            outputs = None

        ssim_values, niqe_values, align_values = [], [], []
        for i, gt in enumerate(gt_corpus):
            lq = degrade(gt, level)
            restored = outputs[i] if outputs is not None else lq
            if restored.shape != gt.shape:
                restored = resize(restored, gt.width, gt.height)
            ssim_values.append(ssim(gt, restored))
            if pristine is not None:
                niqe_values.append(niqe_score(restored, pristine))
            if backend is not None:
                align_values.append(
                    align_auto(restored, gt, lq, level, backend, gamma_threshold).value)

        n = len(gt_corpus)
        rows.append(SweepRow(level_value, "ssim", sum(ssim_values) / n, n))
        if niqe_values:
            rows.append(SweepRow(level_value, "niqe", sum(niqe_values) / n, n))
        if align_values:
            rows.append(SweepRow(level_value, "alignment", sum(align_values) / n, n))
    return rows


@dataclass(frozen=True)
class ResourceRow:
    model_name: str
    param_count: int
    latency_ms: float | None
    means: dict = field(repr=False)
    count: int = 0


def resource_report(
    summaries: Sequence[GroupSummary], metas: Mapping[str, ModelMeta]
) -> list[ResourceRow]:
    """Join per-model summaries with parameter/latency metadata, verbatim."""
    rows = []
    for summary in summaries:
        meta = metas.get(summary.model_name)
        if meta is None:
            raise ManifestError(f"no ModelMeta for model {summary.model_name!r}")
        rows.append(ResourceRow(
            model_name=summary.model_name,
            param_count=meta.param_count,
            latency_ms=meta.latency_ms,
            means=dict(summary.means),
            count=summary.count,
        ))
    return rows


def evaluate_triple(
    image_id: str,
    model_name: str,
    gt: ImagePlane,
    lq: ImagePlane,
    restored: ImagePlane,
    spec: DegradationSpec,
    pristine: PristineModel,
    backend: SemanticBackend,
    gamma_threshold: float = 0.5,
    force_mode: str | None = None,
    alignment_ids: Mapping[str, str] | None = None,
) -> EvaluationRecord:
    """Compute the full metric vector for one (gt, lq, restoration) triple.

    Restorations are resized to ground-truth dimensions before full-reference
    metrics; alignment honors force_mode ("gt" or "lq") over the retention
    rule when given.
    """
    ids = dict(alignment_ids or {})
    if restored.shape != gt.shape:
        restored_full = resize(restored, gt.width, gt.height)
    else:
        restored_full = restored

    psnr_value, capped = cap_psnr(psnr(gt, restored_full))
    ssim_value = ssim(gt, restored_full)
    niqe_value = niqe_score(restored_full, pristine)

    if force_mode == "gt":
        score = align_gt_side(restored_full, gt, backend,
                              ids.get("restored"), ids.get("gt"))
    elif force_mode == "lq":
        score = align_lq_side(restored_full, lq, spec, backend,
                              ids.get("degraded"), ids.get("lq"))
    elif force_mode is None:
        score = align_auto(restored_full, gt, lq, spec, backend, gamma_threshold,
                           restored_id=ids.get("restored"), gt_id=ids.get("gt"),
                           lq_id=ids.get("lq"), degraded_id=ids.get("degraded"))
    else:
        raise ParameterError(f"force_mode must be 'gt', 'lq', or None, got {force_mode!r}")

    return EvaluationRecord(
        image_id=image_id,
        model_name=model_name,
        spec=spec,
        psnr=psnr_value,
        psnr_capped=capped,
        ssim=ssim_value,
        niqe=niqe_value,
        alignment_value=score.value,
        alignment_mode=score.mode,
        alignment_backend=score.backend,
    )
