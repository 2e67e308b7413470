"""CSV and SVG emission. Everything here is deterministic: reruns with the
same inputs produce byte-identical files, and the records CSV parses back
losslessly (floats are written with round-trip precision)."""
from __future__ import annotations

import csv
import os
from typing import Sequence

from ..analysis import (
    EvaluationRecord,
    GroupSummary,
    ResourceRow,
    SweepRow,
)
from ..degradation import DegradationSpec

RECORD_FIELDS = [
    "image_id", "model", "blur_sigma", "downsample_alpha", "noise_beta", "seed",
    "psnr", "psnr_capped", "ssim", "niqe",
    "alignment_value", "alignment_mode", "alignment_backend",
]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records_csv(records: Sequence[EvaluationRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for r in records:
            writer.writerow([
                r.image_id, r.model_name,
                _fmt(r.spec.blur_sigma), _fmt(r.spec.downsample_alpha),
                _fmt(r.spec.noise_beta), r.spec.seed,
                _fmt(r.psnr), int(r.psnr_capped), _fmt(r.ssim), _fmt(r.niqe),
                _fmt(r.alignment_value), r.alignment_mode, r.alignment_backend,
            ])


def read_records_csv(path: str | os.PathLike) -> list[EvaluationRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RECORD_FIELDS:
            raise ValueError(f"unexpected records CSV header in {path}: {reader.fieldnames}")
        for row in reader:
            spec = DegradationSpec(
                blur_sigma=float(row["blur_sigma"]),
                downsample_alpha=float(row["downsample_alpha"]),
                noise_beta=float(row["noise_beta"]),
                seed=int(row["seed"]),
            )
            records.append(EvaluationRecord(
                image_id=row["image_id"],
                model_name=row["model"],
                spec=spec,
                psnr=float(row["psnr"]),
                psnr_capped=bool(int(row["psnr_capped"])),
                ssim=float(row["ssim"]),
                niqe=float(row["niqe"]),
                alignment_value=float(row["alignment_value"]),
                alignment_mode=row["alignment_mode"],
                alignment_backend=row["alignment_backend"],
            ))
    return records


def write_sweep_csv(rows: Sequence[SweepRow], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "metric", "mean", "count"])
        for row in rows:
            writer.writerow([_fmt(row.level), row.metric, _fmt(row.mean), row.count])


def write_plane_csv(
    rows: Sequence[tuple[str, float, float]],
    labels: tuple[str, str],
    path: str | os.PathLike,
) -> None:
    """Rows of (model, x, y) for one tradeoff plane."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", labels[0], labels[1]])
        for model, x, y in rows:
            writer.writerow([model, _fmt(x), _fmt(y)])


def write_resource_csv(rows: Sequence[ResourceRow], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "param_count", "latency_ms",
                         "psnr", "ssim", "niqe", "alignment", "count"])
        for r in rows:
            writer.writerow([
                r.model_name, r.param_count,
                _fmt(r.latency_ms) if r.latency_ms is not None else "",
                _fmt(r.means["psnr"]), _fmt(r.means["ssim"]),
                _fmt(r.means["niqe"]), _fmt(r.means["alignment"]), r.count,
            ])


def summary_table(summaries: Sequence[GroupSummary]) -> str:
    """Per-model table with orientation markers; best value per column flagged."""
    if not summaries:
        return "(no results)\n"
    lower_better_alignment = summaries[0].alignment_backend != "ssim"
    columns = [
        ("alignment" + ("↓" if lower_better_alignment else "↑"),
         "alignment", lower_better_alignment),
        ("ssim↑", "ssim", False),
        ("psnr↑", "psnr", False),
        ("niqe↓", "niqe", True),
    ]
    best = {}
    for _, key, lower in columns:
        values = [s.means[key] for s in summaries]
        best[key] = min(values) if lower else max(values)

    name_width = max(len("model"), max(len(s.model_name) for s in summaries))
    header = "model".ljust(name_width) + "".join(f"  {label:>12}" for label, _, _ in columns)
    lines = [header, "-" * len(header)]
    for s in summaries:
        cells = []
        for _, key, _ in columns:
            mark = "*" if s.means[key] == best[key] else " "
            cells.append(f"  {s.means[key]:>11.4f}{mark}")
        lines.append(s.model_name.ljust(name_width) + "".join(cells))
    lines.append(f"(* best per column; n={summaries[0].count} images; "
                 f"alignment mode {summaries[0].alignment_modes})")
    return "\n".join(lines) + "\n"


# --- minimal static SVG -----------------------------------------------------

_SVG_W, _SVG_H = 640, 480
_MARGIN = 60
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _scale(values: Sequence[float], lo_px: float, hi_px: float) -> list[float]:
    lo, hi = min(values), max(values)
    span = (hi - lo) or 1.0
    return [lo_px + (v - lo) / span * (hi_px - lo_px) for v in values]


def _svg_header(title: str, xlabel: str, ylabel: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<text x="{_SVG_W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{_MARGIN}" y1="{_SVG_H - _MARGIN}" x2="{_SVG_W - _MARGIN}" '
        f'y2="{_SVG_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" y2="{_SVG_H - _MARGIN}" '
        f'stroke="black"/>',
        f'<text x="{_SVG_W / 2:.1f}" y="{_SVG_H - 15}" text-anchor="middle" '
        f'font-size="12">{xlabel}</text>',
        f'<text x="18" y="{_SVG_H / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 18 {_SVG_H / 2:.1f})">{ylabel}</text>',
    ]


def write_sweep_svg(rows: Sequence[SweepRow], path: str | os.PathLike) -> None:
    """One polyline per metric over the sweep levels (each metric self-normalized)."""
    metrics = sorted({r.metric for r in rows})
    parts = _svg_header("degradation sweep", "level", "mean (per-metric scale)")
    for idx, metric in enumerate(metrics):
        series = [(r.level, r.mean) for r in rows if r.metric == metric]
        series.sort()
        xs = _scale([p[0] for p in series], _MARGIN, _SVG_W - _MARGIN)
        ys = _scale([p[1] for p in series], _SVG_H - _MARGIN, _MARGIN)
        color = _COLORS[idx % len(_COLORS)]
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                     f'stroke-width="2"/>')
        parts.append(f'<text x="{_SVG_W - _MARGIN + 5}" y="{_MARGIN + 16 * idx}" '
                     f'font-size="11" fill="{color}">{metric}</text>')
    parts.append("</svg>")
    _write_svg(parts, path)


def write_scatter_svg(
    points: Sequence[tuple[str, float, float]],
    front: Sequence[tuple[float, float]],
    title: str,
    xlabel: str,
    ylabel: str,
    path: str | os.PathLike,
) -> None:
    """Scatter of labeled points with the Pareto front joined by a line."""
    parts = _svg_header(title, xlabel, ylabel)
    xs_all = [p[1] for p in points]
    ys_all = [p[2] for p in points]
    xs = _scale(xs_all, _MARGIN, _SVG_W - _MARGIN)
    ys = _scale(ys_all, _SVG_H - _MARGIN, _MARGIN)
    front_set = set(front)
    if len(front) > 1:
        fx = _scale([*xs_all, *[p[0] for p in front]], _MARGIN, _SVG_W - _MARGIN)[len(xs_all):]
        fy = _scale([*ys_all, *[p[1] for p in front]], _SVG_H - _MARGIN, _MARGIN)[len(ys_all):]
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in sorted(zip(fx, fy)))
        parts.append(f'<polyline points="{coords}" fill="none" stroke="#d62728" '
                     f'stroke-dasharray="4 3"/>')
    for (label, px, py), x, y in zip(points, xs, ys):
        on_front = (px, py) in front_set
        color = "#d62728" if on_front else "#1f77b4"
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{color}"/>')
        parts.append(f'<text x="{x + 6:.2f}" y="{y - 6:.2f}" font-size="11">{label}</text>')
    parts.append("</svg>")
    _write_svg(parts, path)


def _write_svg(parts: Sequence[str], path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
