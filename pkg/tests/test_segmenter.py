import random
import statistics

import pytest

from egogaze.errors import ConfigError, PipelineError
from egogaze.segmenter import (EventBoundary, GatingParams, RunningStats,
                               Segmenter)


def reference_gate(energies, lam, min_event_len, warmup):
    """Independent running-stats gate: recomputes mean/std from an explicit
    window list each frame instead of Welford accumulators."""
    window = []
    boundaries = []
    last_boundary = None
    for frame, energy in enumerate(energies):
        gap_ok = last_boundary is None or frame - last_boundary >= min_event_len
        if frame >= warmup and gap_ok and len(window) >= 2:
            mean = statistics.fmean(window)
            std = statistics.stdev(window)
            if energy > mean + lam * std:
                boundaries.append(frame)
                window = []
                last_boundary = frame
                continue
        window.append(energy)
    return boundaries


def run_segmenter(energies, **kwargs):
    seg = Segmenter(GatingParams(**kwargs))
    out = []
    for frame, energy in enumerate(energies):
        b = seg.observe(energy, frame)
        if b is not None:
            out.append(b)
    return out


def test_constant_stream_never_fires():
    assert run_segmenter([3.25] * 500, warmup=0) == []


def test_jittered_baseline_then_spike():
    # warmup covers the first frames, where a 2-sample window of tiny jitter
    # would make the gate a hair-trigger
    rnd = random.Random(6)
    energies = [1.0 + rnd.uniform(-0.01, 0.01) for _ in range(100)] + [10.0]
    got = run_segmenter(energies, warmup=30)
    assert [b.frame_index for b in got] == [100]
    b = got[0]
    assert b.energy == 10.0
    # oracle for the z-score: brute-force stats of the first 100 energies
    mean = statistics.fmean(energies[:100])
    std = statistics.stdev(energies[:100])
    assert b.z == pytest.approx((10.0 - mean) / std, rel=1e-9)
    assert b.z > 2.5


def test_refractory_keeps_only_first_spike():
    rnd = random.Random(7)
    energies = [1.0 + rnd.uniform(-0.01, 0.01) for _ in range(60)]
    energies[40] = 10.0
    energies[45] = 10.0
    got = run_segmenter(energies, min_event_len=15, warmup=30)
    assert [b.frame_index for b in got] == [40]


def test_matches_reference_gate_on_random_streams():
    rnd = random.Random(99)
    for trial in range(30):
        lam = rnd.choice([0.5, 1.5, 2.5])
        min_len = rnd.choice([1, 5, 15])
        warmup = rnd.choice([0, 10, 30])
        energies = []
        level = rnd.uniform(0.5, 3.0)
        for _ in range(rnd.randint(50, 300)):
            if rnd.random() < 0.03:
                level = rnd.uniform(0.5, 6.0)
            energies.append(level + rnd.uniform(-0.05, 0.05))
        got = [b.frame_index for b in
               run_segmenter(energies, lam=lam, min_event_len=min_len,
                             warmup=warmup)]
        want = reference_gate(energies, lam, min_len, warmup)
        assert got == want, f"trial {trial}"


def test_boundary_gaps_and_monotonicity():
    rnd = random.Random(123)
    energies = [rnd.uniform(0, 5) for _ in range(2000)]
    got = run_segmenter(energies, lam=0.5, min_event_len=7, warmup=3)
    frames = [b.frame_index for b in got]
    assert frames == sorted(frames)
    assert all(b - a >= 7 for a, b in zip(frames, frames[1:]))
    assert len(frames) > 0


def test_scale_equivariance():
    rnd = random.Random(5)
    energies = [rnd.uniform(0.5, 2.0) for _ in range(400)]
    base = [b.frame_index for b in run_segmenter(energies, warmup=0, lam=1.0)]
    for lam_scale in (0.001, 7.0, 1234.5):
        scaled = [e * lam_scale for e in energies]
        got = [b.frame_index for b in run_segmenter(scaled, warmup=0, lam=1.0)]
        assert got == base


def test_stats_reset_after_boundary():
    # high plateau, boundary, then a low regime: the low regime must be
    # judged against post-boundary stats only, so a return to the plateau
    # level fires again once the refractory window passes
    energies = [5.0, 5.01, 4.99, 5.0, 20.0]      # boundary at 4
    energies += [1.0, 1.01, 0.99, 1.0, 1.01, 5.0]  # then at 10
    got = run_segmenter(energies, min_event_len=3, warmup=0)
    assert [b.frame_index for b in got] == [4, 10]


def test_warmup_blocks_early_boundaries():
    energies = [1.0, 1.0, 50.0] + [1.0] * 30
    assert run_segmenter(energies, warmup=10) == []
    got = run_segmenter(energies, warmup=0)
    assert [b.frame_index for b in got] == [2]


def test_zero_std_trigger_has_null_z():
    got = run_segmenter([1.0, 1.0, 1.0, 2.0], warmup=0, min_event_len=1)
    assert [b.frame_index for b in got] == [3]
    assert got[0].z is None


def test_out_of_order_frames_rejected():
    seg = Segmenter(GatingParams())
    seg.observe(1.0, 0)
    seg.observe(1.0, 1)
    with pytest.raises(PipelineError):
        seg.observe(1.0, 1)


def test_running_stats_welford():
    rnd = random.Random(17)
    values = [rnd.uniform(-5, 5) for _ in range(200)]
    stats = RunningStats()
    for v in values:
        stats.update(v)
    assert stats.count == 200
    assert stats.mean == pytest.approx(statistics.fmean(values), rel=1e-12)
    assert stats.std == pytest.approx(statistics.stdev(values), rel=1e-9)
    stats.reset()
    assert stats.count == 0 and stats.mean == 0.0 and stats.variance == 0.0


def test_gating_params_validation():
    with pytest.raises(ConfigError):
        GatingParams(lam=0.0)
    with pytest.raises(ConfigError):
        GatingParams(min_event_len=0)
    with pytest.raises(ConfigError):
        GatingParams(warmup=-1)
