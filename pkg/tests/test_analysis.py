import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ir_evalkit.alignment import SemanticBackend
from ir_evalkit.analysis import (
    PSNR_CAP,
    EvaluationRecord,
    ModelMeta,
    aggregate,
    aggregate_by_model,
    cap_psnr,
    degradation_sweep,
    evaluate_triple,
    pareto_front,
    resource_report,
)
from ir_evalkit.degradation import DegradationSpec
from ir_evalkit.errors import ManifestError, ParameterError


def record(image_id="a", model="m", ssim=0.9, psnr=30.0, capped=False, niqe=4.0,
           align=0.1, sigma=1.0):
    return EvaluationRecord(
        image_id=image_id, model_name=model,
        spec=DegradationSpec(blur_sigma=sigma, seed=1),
        psnr=psnr, psnr_capped=capped, ssim=ssim, niqe=niqe,
        alignment_value=align, alignment_mode="gt-side", alignment_backend="builtin",
    )


# --- records / aggregation ---------------------------------------------------

def test_record_rejects_nonfinite():
    with pytest.raises(ParameterError):
        record(psnr=math.inf)


def test_cap_psnr():
    assert cap_psnr(42.0) == (42.0, False)
    assert cap_psnr(math.inf) == (PSNR_CAP, True)


def test_aggregate_single_record():
    [summary] = aggregate([record()])
    assert summary.count == 1
    assert summary.means["ssim"] == 0.9
    assert summary.means["psnr"] == 30.0


def test_aggregate_means():
    [summary] = aggregate([record(image_id="a", ssim=0.8), record(image_id="b", ssim=0.9)])
    assert summary.means["ssim"] == pytest.approx(0.85)


def test_aggregate_partitions_exactly():
    records = [record(image_id=f"i{k}", model=m, sigma=s)
               for k, (m, s) in enumerate([("m1", 1.0), ("m1", 2.0), ("m2", 1.0), ("m1", 1.0)])]
    summaries = aggregate(records)
    assert sum(s.count for s in summaries) == len(records)
    assert len(summaries) == 3  # (m1,1), (m1,2), (m2,1)


def test_aggregate_permutation_invariant():
    records = [record(image_id=f"i{k}", ssim=v) for k, v in enumerate([0.5, 0.7, 0.9])]
    a = aggregate(records)
    b = aggregate(records[::-1])
    assert a == b


def test_aggregate_excludes_capped_psnr():
    records = [record(image_id="a", psnr=30.0),
               record(image_id="b", psnr=PSNR_CAP, capped=True)]
    [summary] = aggregate(records)
    assert summary.means["psnr"] == 30.0
    assert summary.psnr_capped_count == 1


def test_aggregate_empty_rejected():
    with pytest.raises(ParameterError):
        aggregate([])


def test_aggregate_by_model_collapses_specs():
    records = [record(image_id="a", sigma=1.0), record(image_id="b", sigma=2.0)]
    assert len(aggregate_by_model(records)) == 1
    assert len(aggregate(records)) == 2


# --- pareto ------------------------------------------------------------------

def brute_force_front(points):
    kept = []
    for p in points:
        dominated = any(
            q[0] <= p[0] and q[1] <= p[1] and (q[0] < p[0] or q[1] < p[1])
            for q in points
        )
        if not dominated:
            kept.append(p)
    return sorted(kept)


def test_pareto_trivials():
    assert pareto_front([(1.0, 1.0)]) == [(1.0, 1.0)]
    assert pareto_front([(1.0, 1.0), (2.0, 2.0)]) == [(1.0, 1.0)]
    assert pareto_front([]) == []


def test_pareto_keeps_exact_ties():
    pts = [(1.0, 2.0), (1.0, 2.0), (2.0, 1.0)]
    assert pareto_front(pts) == [(1.0, 2.0), (1.0, 2.0), (2.0, 1.0)]


def test_pareto_rejects_nonfinite():
    with pytest.raises(ParameterError):
        pareto_front([(math.nan, 1.0)])


def test_pareto_matches_bruteforce_on_random_sets():
    rng = np.random.default_rng(123)
    for _ in range(100):
        n = int(rng.integers(1, 21))
        pts = [(float(x), float(y))
               for x, y in rng.integers(0, 8, (n, 2))]  # ints force plenty of ties
        assert sorted(pareto_front(pts)) == brute_force_front(pts)


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=20))
@settings(max_examples=100, deadline=None)
def test_pareto_front_is_dominance_free(points):
    front = pareto_front(points)
    assert sorted(front) == brute_force_front(points)
    for p in front:
        for q in front:
            assert not (q[0] <= p[0] and q[1] <= p[1] and (q[0] < p[0] or q[1] < p[1]))
    for p in points:
        if p not in front:
            assert any(q[0] <= p[0] and q[1] <= p[1] and (q[0] < p[0] or q[1] < p[1])
                       for q in front)


# --- sweep -------------------------------------------------------------------

def test_sweep_identity_restorer_trend(corpus):
    levels = [DegradationSpec(blur_sigma=s, seed=0) for s in (1.0, 4.0, 20.0)]
    rows = degradation_sweep(corpus, levels, backend=SemanticBackend.builtin())
    ssim_means = [r.mean for r in rows if r.metric == "ssim"]
    assert [r.level for r in rows if r.metric == "ssim"] == [1.0, 4.0, 20.0]
    assert ssim_means[0] > ssim_means[1] > ssim_means[2]
    assert all(r.count == len(corpus) for r in rows)


def test_sweep_zero_degradation_is_optimal(corpus):
    rows = degradation_sweep(corpus[:3], [DegradationSpec()],
                             backend=SemanticBackend.builtin())
    by_metric = {r.metric: r.mean for r in rows}
    assert by_metric["ssim"] == 1.0
    assert by_metric["alignment"] == 0.0


def test_sweep_missing_outputs_rejected(corpus):
    levels = [DegradationSpec(blur_sigma=1.0), DegradationSpec(blur_sigma=2.0)]
    with pytest.raises(ManifestError):
        degradation_sweep(corpus[:2], levels, restorer_outputs={0: corpus[:2]})


def test_sweep_level_axis_uses_varying_parameter(corpus):
    levels = [DegradationSpec(downsample_alpha=a) for a in (2.0, 4.0)]
    rows = degradation_sweep(corpus[:2], levels)
    assert sorted({r.level for r in rows}) == [2.0, 4.0]


# --- resource report ---------------------------------------------------------

def test_resource_report_joins_verbatim():
    summaries = aggregate_by_model([record(model="m1"), record(image_id="b", model="m2")])
    metas = {
        "m1": ModelMeta("m1", param_count=1_000, latency_ms=12.5),
        "m2": ModelMeta("m2", param_count=2_000_000, latency_ms=None),
    }
    rows = resource_report(summaries, metas)
    assert len(rows) == 2
    assert rows[0].param_count == 1_000
    assert rows[0].latency_ms == 12.5
    assert rows[1].latency_ms is None


def test_resource_report_missing_meta():
    summaries = aggregate_by_model([record()])
    with pytest.raises(ManifestError):
        resource_report(summaries, {})


def test_model_meta_validation():
    with pytest.raises(ParameterError):
        ModelMeta("m", param_count=0)
    with pytest.raises(ParameterError):
        ModelMeta("m", param_count=5, latency_ms=-1.0)


# --- single-triple evaluation --------------------------------------------------

def test_evaluate_triple_identity_pipeline(corpus, pristine_model):
    gt = corpus[0]
    spec = DegradationSpec()
    rec = evaluate_triple("img0", "identity", gt, gt, gt, spec,
                          pristine_model, SemanticBackend.builtin())
    assert rec.ssim == 1.0
    assert rec.psnr == PSNR_CAP and rec.psnr_capped
    assert rec.alignment_value == 0.0
    assert rec.alignment_mode == "gt-side"
