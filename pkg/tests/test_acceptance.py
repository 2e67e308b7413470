"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest -s tests/test_acceptance.py` to see the lines, or execute
this file directly (`python tests/test_acceptance.py`).
"""
import json
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from ir_evalkit.alignment import (
    EmbeddingManifest,
    SemanticBackend,
    align_gt_side,
    align_lq_side,
    builtin_descriptor,
)
from ir_evalkit.analysis import pareto_front
from ir_evalkit.core import ImagePlane, save_image
from ir_evalkit.degradation import (
    DegradationSpec,
    bicubic_resample,
    blur,
    degrade,
    gaussian_kernel,
)
from ir_evalkit.distortion import psnr, ssim
from ir_evalkit.harness.cli import main
from ir_evalkit.perception import fit_aggd, fit_ggd, niqe_score

from test_analysis import brute_force_front
from test_degradation import naive_blur_reflect101
from test_distortion import naive_windowed_ssim


@contextmanager
def criterion(num: int, limit_s: float | None, desc: str):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"[FAIL] criterion {num:02d}: {desc}")
        raise
    elapsed = time.perf_counter() - start
    if limit_s is not None:
        assert elapsed < limit_s, f"criterion {num} took {elapsed:.1f}s (limit {limit_s}s)"
    print(f"[PASS] criterion {num:02d}: {desc} ({elapsed:.1f}s)")


def test_c01_psnr_analytic():
    with criterion(1, 1.0, "PSNR of constant 0.5 vs 0.6 is 20 dB"):
        a = ImagePlane(np.full((32, 32, 1), 0.5))
        b = ImagePlane(np.full((32, 32, 1), 0.6))
        assert abs(psnr(a, b) - 20.0) < 1e-9


def test_c02_ssim_bruteforce_oracle():
    with criterion(2, 10.0, "SSIM matches per-window brute force on 20 random pairs"):
        rng = np.random.default_rng(42)
        for _ in range(20):
            a = rng.random((64, 64))
            b = np.clip(a + rng.normal(0.0, rng.uniform(0.02, 0.3), a.shape), 0.0, 1.0)
            mine = ssim(ImagePlane(a[:, :, None]), ImagePlane(b[:, :, None]))
            assert abs(mine - naive_windowed_ssim(a, b)) < 1e-6


def test_c03_blur_oracle():
    with criterion(3, None, "blur matches direct 2-D convolution; kernel sums to 1"):
        assert abs(gaussian_kernel(2.0).sum() - 1.0) < 1e-12
        x = np.random.default_rng(7).random((16, 16))
        mine = blur(ImagePlane(x[:, :, None]), 2.0).data[:, :, 0]
        assert np.abs(mine - naive_blur_reflect101(x, 2.0)).max() < 1e-6


def test_c04_bicubic_linear_reproduction():
    with criterion(4, None, "2x bicubic reproduces linear ramps and constants"):
        w = 32
        ramp = np.tile(np.linspace(0.0, 1.0, w), (8, 1))[:, :, None]
        out = bicubic_resample(ImagePlane(ramp), 2.0)
        expect = np.interp((np.arange(16) + 0.5) * 2 - 0.5, np.arange(w), ramp[0, :, 0])
        assert np.abs(out.data[2, 2:-2, 0] - expect[2:-2]).max() < 1e-5
        const = bicubic_resample(ImagePlane(np.full((16, 16, 3), 0.437)), 2.0)
        assert np.abs(const.data - 0.437).max() < 1e-6


def test_c05_ggd_aggd_recovery():
    with criterion(5, 60.0, "GGD/AGGD parameter recovery on 1e6 synthetic samples"):
        from scipy.special import gamma
        rng = np.random.default_rng(11)
        n = 10**6
        for shape in (0.5, 1.0, 2.0, 4.0):
            scale = math.sqrt(gamma(1.0 / shape) / gamma(3.0 / shape))
            samples = scale * rng.gamma(1.0 / shape, 1.0, n) ** (1.0 / shape)
            samples *= rng.choice([-1.0, 1.0], n)
            est_g, _ = fit_ggd(samples)
            assert abs(est_g - shape) / shape < 0.05
            est_a = fit_aggd(samples)
            assert abs(est_a.shape - shape) / shape < 0.05
        sym = fit_aggd(rng.standard_normal(n))
        assert abs(sym.mean) < 0.01


def test_c06_niqe_blur_trend(corpus, pristine_model):
    with criterion(6, 120.0, "per-image NIQE non-decreasing over blur levels (>= 8/10)"):
        monotone = 0
        originals, heavy = [], []
        for img in corpus:
            scores = [niqe_score(blur(img, s), pristine_model) for s in (1.0, 4.0, 20.0)]
            monotone += scores[0] <= scores[1] <= scores[2]
            originals.append(niqe_score(img, pristine_model))
            heavy.append(scores[2])
        assert monotone >= 8
        assert np.mean(heavy) > np.mean(originals)


def test_c07_ssim_blur_trend(corpus):
    with criterion(7, 120.0, "identity-restorer mean SSIM strictly decreasing in blur"):
        means = []
        for sigma in (1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0):
            means.append(np.mean([ssim(img, blur(img, sigma)) for img in corpus]))
        assert all(means[i] > means[i + 1] for i in range(len(means) - 1))


def test_c08_alignment_keystone(corpus):
    with criterion(8, None, "re-degraded ground truth scores the exact optimum"):
        spec = DegradationSpec(blur_sigma=1.0, downsample_alpha=2.0, noise_beta=0.1, seed=99)
        gt = corpus[0]
        lq = degrade(gt, spec)
        assert align_lq_side(gt, lq, spec, SemanticBackend.builtin()).value == 0.0
        assert align_lq_side(gt, lq, spec, SemanticBackend.from_ssim()).value == 1.0
        vec = builtin_descriptor(lq)
        manifest = EmbeddingManifest("fixture-encoder", 512, {"m/k": vec, "k": vec})
        backend = SemanticBackend.embeddings(manifest)
        assert align_lq_side(gt, lq, spec, backend, degraded_id="m/k", lq_id="k").value == 0.0


def test_c09_alignment_ranking(corpus):
    with criterion(9, None, "identity restorer beats heavy-blur restorer (>= 95%)"):
        builtin = SemanticBackend.builtin()
        ssim_backend = SemanticBackend.from_ssim()
        wins_builtin = wins_ssim = 0
        for gt in corpus:
            lq = blur(gt, 1.0)
            heavy = blur(lq, 20.0)
            wins_builtin += (align_gt_side(lq, gt, builtin).value
                             < align_gt_side(heavy, gt, builtin).value)
            wins_ssim += (align_gt_side(lq, gt, ssim_backend).value
                          > align_gt_side(heavy, gt, ssim_backend).value)
        assert wins_builtin >= math.ceil(0.95 * len(corpus))
        assert wins_ssim >= math.ceil(0.95 * len(corpus))


def test_c10_pareto_oracle():
    with criterion(10, None, "pareto front matches O(n^2) dominance filter exactly"):
        rng = np.random.default_rng(77)
        for _ in range(100):
            n = int(rng.integers(1, 21))
            pts = [(float(x), float(y)) for x, y in rng.integers(0, 10, (n, 2))]
            assert sorted(pareto_front(pts)) == brute_force_front(pts)


def test_c11_cli_determinism(corpus, pristine_model, tmp_path):
    with criterion(11, None, "degrade and evaluate reruns are byte-identical"):
        root = tmp_path / "ds"
        (root / "gt").mkdir(parents=True)
        entries = []
        for i in range(3):
            save_image(corpus[i], root / "gt" / f"{i}.png")
            entries.append({
                "image_id": str(i),
                "gt_path": f"gt/{i}.png",
                "spec": {"blur_sigma": 0.5, "downsample_alpha": 2.0,
                         "noise_beta": 0.05, "seed": 40 + i},
                "restorations": {"identity": f"lq1/{i}.png"},
            })
        (root / "manifest.json").write_text(json.dumps({"version": 1, "entries": entries}))
        pristine = tmp_path / "pristine.json"
        pristine_model.save(pristine)

        for run in ("lq1", "lq2"):
            assert main(["degrade", "--manifest", str(root / "manifest.json"),
                         "--out", str(root / run)]) == 0
        for i in range(3):
            assert (root / "lq1" / f"{i}.png").read_bytes() == \
                (root / "lq2" / f"{i}.png").read_bytes()

        for run in ("r1", "r2"):
            assert main(["evaluate", "--manifest", str(root / "lq1" / "manifest.json"),
                         "--pristine", str(pristine), "--out", str(tmp_path / run)]) == 0
        assert (tmp_path / "r1" / "records.csv").read_bytes() == \
            (tmp_path / "r2" / "records.csv").read_bytes()
        assert (tmp_path / "r1" / "summary.json").read_bytes() == \
            (tmp_path / "r2" / "summary.json").read_bytes()


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-s", "-q"]))
