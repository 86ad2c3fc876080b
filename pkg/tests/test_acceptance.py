"""Acceptance suite. Each test prints one PASS/FAIL line and asserts it."""

import math
import time

import numpy as np
import pytest
from scipy import stats as sps

from conftest import random_run_stream, record_acceptance
from otalc.cleaner import Backdate, Cleaner, CleanerConfig, clean, reference_clean
from otalc.cli import bench
from otalc.core import ClassMap, LabelStream, Segment
from otalc.cutoffs import (ClassBased, ClassLengthStats, ClassStat, Static, fit_class_stats,
                           lognormal_mean, lognormal_std)
from otalc.metrics import edit_score, f1_at_iou, mof_accuracy, report
from otalc.sampling import (BoundaryPolicy, ClipSpec, clip_indices, dense_train_start,
                            inference_clip_indices, surround_start_range, surround_train_start)
from otalc.simulate import GenModel, NoiseConfig, corrupt, gen_ground_truth
from otalc.tune import GridSpec, grid_search


def random_config(rng, num_classes):
    """A valid static or class-based config for ``num_classes`` classes."""
    if rng.random() < 0.5:
        c_min = int(rng.integers(2, 13))
        return CleanerConfig(Static(c_min), int(rng.integers(1, c_min)))
    classes = tuple(
        ClassStat(int(rng.integers(1, 50)), float(rng.uniform(0.5, 3.5)), float(rng.uniform(0.0, 0.8)))
        if rng.random() < 0.85 else ClassStat(0)
        for _ in range(num_classes))
    c_abs = int(rng.integers(2, 8))
    policy = ClassBased(float(rng.uniform(0.0, 2.0)), c_abs, ClassLengthStats(classes))
    lowest = min(policy.cutoff(c) for c in range(num_classes))
    return CleanerConfig(policy, int(rng.integers(1, lowest)))


def test_1_engine_matches_reference():
    rng = np.random.default_rng(1001)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        C = int(rng.integers(2, 9))
        cm = ClassMap.of_size(C)
        cfg = random_config(rng, C)
        raw = LabelStream(tuple(random_run_stream(rng, int(rng.integers(0, 501)), C)), cm)
        cleaner = Cleaner(cfg, cm)
        for y in raw.labels:
            cleaner.push(y)
        if cleaner.tidy_snapshot() != reference_clean(raw, cfg):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 30
    record_acceptance(1, ok, f"1000 streams, {mismatches} mismatches, {elapsed:.1f}s (limit 30s)")
    assert ok


def test_2_backdate_latency():
    rng = np.random.default_rng(1002)
    checked = failures = 0
    while checked < 100:
        C = int(rng.integers(2, 9))
        cm = ClassMap.of_size(C)
        cfg = random_config(rng, C)
        labels, starts = [], []
        prev = None
        for _ in range(int(rng.integers(2, 5))):
            c = int(rng.integers(C))
            while c == prev:
                c = int(rng.integers(C))
            starts.append((len(labels), c))
            labels += [c] * (cfg.cutoff(c) + int(rng.integers(0, 20)))
            prev = c
        cleaner = Cleaner(cfg, cm)
        fired = {}
        for t, y in enumerate(labels):
            for ev in cleaner.push(y):
                if isinstance(ev, Backdate):
                    fired[ev.start] = (t, ev)
        for start, c in starts[1:]:
            checked += 1
            t, ev = fired.get(start, (None, None))
            cut = cfg.cutoff(c)
            good = (ev is not None and ev.label == c and t - start + 1 == cut
                    and ev.end - ev.start + 1 == cut - 1)
            failures += not good
    ok = failures == 0
    record_acceptance(2, ok, f"{checked} clean transitions, {failures} with wrong backdate timing or depth")
    assert ok


def test_3_throughput():
    t0 = time.perf_counter()
    fps = bench(1_000_000, CleanerConfig(Static(9), 2), 8, 0)
    elapsed = time.perf_counter() - t0
    ok = fps >= 1000 and elapsed < 60
    record_acceptance(3, ok, f"{fps:,.0f} frames/s on 1e6 frames, {elapsed:.1f}s wall (limits >= 1000 fps, < 60s)")
    assert ok


def test_4_blip_removal_direction():
    model = GenModel.uniform(ClassMap.of_size(6), math.log(80.0), 0.5)
    noise = NoiseConfig(blip_rate=0.5, blip_len_max=4)
    cfg = CleanerConfig(Static(9), 2)
    raw_reps, clean_reps = [], []
    for seed in range(50):
        rng = np.random.default_rng(seed)
        gt = gen_ground_truth(model, 5000, rng)
        raw = corrupt(gt, noise, rng)
        raw_reps.append(report(raw, gt))
        clean_reps.append(report(clean(raw, cfg), gt))

    def mean(reps, what):
        return float(np.mean([what(r) for r in reps]))

    f1_raw, f1_clean = (mean(r, lambda x: 100 * x.f1_at(0.5)) for r in (raw_reps, clean_reps))
    ed_raw, ed_clean = (mean(r, lambda x: x.edit) for r in (raw_reps, clean_reps))
    acc_raw, acc_clean = (mean(r, lambda x: 100 * x.acc) for r in (raw_reps, clean_reps))
    ok = f1_clean - f1_raw >= 15 and ed_clean > ed_raw and abs(acc_clean - acc_raw) < 2
    record_acceptance(4, ok, f"F1@0.5 {f1_raw:.1f} -> {f1_clean:.1f}, edit {ed_raw:.1f} -> {ed_clean:.1f}, "
                             f"MoF {acc_raw:.2f} -> {acc_clean:.2f}")
    assert ok


def test_5_metric_oracles():
    ab = ClassMap(("A", "B"))
    abc = ClassMap(("A", "B", "C"))

    def s(text, cm):
        return LabelStream(tuple(cm.index(ch) for ch in text), cm)

    gt = s("A" * 10 + "B" * 10, ab)
    pred = s("A" * 10 + "B" * 4 + "A" + "B" * 5, ab)
    checks = [
        abs(mof_accuracy(s("AABB", ab), s("ABBB", ab)) - 0.75) < 1e-9,
        abs(f1_at_iou(pred, gt, 0.5).f1 - 2 / 3) < 1e-9,
        abs(f1_at_iou(pred, gt, 0.25).f1 - 2 / 3) < 1e-9,
        abs(edit_score(s("AC", abc), s("ABC", abc)) - 100 * (1 - 1 / 3)) < 1e-9,
    ]
    rng = np.random.default_rng(1005)
    thresholds = [0.1, 0.25, 0.5, 0.75, 0.9, 1.0]
    monotone = 0
    for _ in range(100):
        C = int(rng.integers(2, 6))
        cm = ClassMap.of_size(C)
        n = int(rng.integers(1, 200))
        g = LabelStream(tuple(random_run_stream(rng, n, C)), cm)
        p = LabelStream(tuple(random_run_stream(rng, n, C)), cm)
        vals = [f1_at_iou(p, g, thr).f1 for thr in thresholds]
        monotone += all(a >= b for a, b in zip(vals, vals[1:]))
    ok = all(checks) and monotone == 100
    record_acceptance(5, ok, f"hand examples {sum(checks)}/{len(checks)}, monotone pairs {monotone}/100")
    assert ok


def test_6_identity_and_idempotence():
    rng = np.random.default_rng(1006)
    identity = idempotent = 0
    for _ in range(500):
        C = int(rng.integers(2, 9))
        cm = ClassMap.of_size(C)
        cfg = random_config(rng, C)
        # every segment at least as long as its cutoff, so nothing can be bridged
        labels, prev = [], None
        while len(labels) < 300:
            c = int(rng.integers(C))
            if c == prev:
                continue
            labels += [c] * (cfg.cutoff(c) + int(rng.integers(0, 15)))
            prev = c
        long_runs = LabelStream(tuple(labels), cm)
        identity += clean(long_runs, cfg) == long_runs
        raw = LabelStream(tuple(random_run_stream(rng, int(rng.integers(0, 400)), C)), cm)
        once = clean(raw, cfg)
        idempotent += clean(once, cfg) == once
    ok = identity == 500 and idempotent == 500
    record_acceptance(6, ok, f"identity {identity}/500, idempotence {idempotent}/500")
    assert ok


def test_7_sampling_laws():
    rng = np.random.default_rng(1007)
    spec = ClipSpec(8, 8)
    seg = Segment(0, 100, 149)
    lo, hi = surround_start_range(seg, spec)
    draws = np.array([surround_train_start(seg, spec, rng) for _ in range(10_000)])
    counts = np.bincount(draws - lo, minlength=hi - lo + 1)
    p_value = sps.chisquare(counts).pvalue
    uniform_ok = len(counts) == hi - lo + 1 and p_value > 0.01

    short_ok = True
    for _ in range(200):
        n_s = int(rng.integers(0, 500))
        n_e = n_s + int(rng.integers(0, spec.span + 1))
        short_ok &= dense_train_start(Segment(0, n_s, n_e), spec, rng) == n_s

    # The surround clip starting half a span before labeled frame f is the
    # online clip emitted at t = f - h + span.
    surround_ok = dense_fails_as_predicted = 0
    for _ in range(100):
        sp = ClipSpec(int(rng.integers(2, 12)), int(rng.integers(1, 6)))
        h = sp.half_span
        n_s = h + int(rng.integers(0, 200))
        n_e = n_s + int(rng.integers(0, 3 * sp.span))
        video_len = n_e + sp.span + 1
        seg = Segment(0, n_s, n_e)
        s_lo, s_hi = surround_start_range(seg, sp)
        online = [f - h + sp.span for f in range(n_s, n_e + 1)]
        good = True
        for t in online:
            start = t - sp.span
            good &= (s_lo <= start <= s_hi and
                     clip_indices(start, sp, BoundaryPolicy.CLAMP_REPEAT, video_len) == inference_clip_indices(t, sp))
        surround_ok += good
        if n_e - n_s > sp.span:
            dense_starts = range(n_s, n_e - sp.span + 1)
        else:
            dense_starts = range(n_s, n_s + 1)
        dense_ts = {s + sp.span for s in dense_starts}
        early = [t for t in online if t < n_s + sp.span]
        dense_fails_as_predicted += bool(early) and not dense_ts.intersection(early)
    ok = uniform_ok and short_ok and surround_ok == 100 and dense_fails_as_predicted == 100
    record_acceptance(7, ok, f"chi-square p={p_value:.3f} (alpha 0.01), dense short ok={short_ok}, "
                             f"surround matches {surround_ok}/100, dense fails as predicted {dense_fails_as_predicted}/100")
    assert ok


def test_8_lognormal_closed_forms():
    rng = np.random.default_rng(1008)
    worst = 0.0
    for _ in range(50):
        mu, sigma = float(rng.uniform(0.0, 5.0)), float(rng.uniform(0.05, 1.0))
        x = rng.lognormal(mu, sigma, 1_000_000)
        worst = max(worst, abs(x.mean() / lognormal_mean(mu, sigma) - 1),
                    abs(x.std() / lognormal_std(mu, sigma) - 1))
    labels = []
    for length in (3, 9, 27):
        labels += [0] * length + [1]
    stat = fit_class_stats([LabelStream(tuple(labels), ClassMap(("x", "gap")))]).get(0)
    ref = sps.lognorm(s=math.log(3), scale=9.0)
    example_ok = (f"{stat.mu_frames:.4g}" == f"{ref.mean():.4g}" == "16.46"
                  and f"{stat.sigma_frames:.4g}" == f"{ref.std():.4g}")
    ok = worst < 0.02 and example_ok
    record_acceptance(8, ok, f"worst Monte-Carlo relative error {100 * worst:.2f}% (limit 2%), "
                             f"{{3,9,27}} -> mean {stat.mu_frames:.4g}, std {stat.sigma_frames:.4g}")
    assert ok


def test_9_grid_search():
    model = GenModel.uniform(ClassMap.of_size(4), math.log(30), 0.3)
    pairs = []
    for seed in range(3):
        rng = np.random.default_rng(seed)
        gt = gen_ground_truth(model, 2000, rng)
        pairs.append((corrupt(gt, NoiseConfig(blip_rate=1.0, blip_len_max=2), rng), gt))
    winner = grid_search(pairs, GridSpec(static_c_min=(2, 3), static_b=(1,))).best.params
    grid = GridSpec(static_c_min=(2, 3, 5, 9), static_b=(1, 2, 3, 4, 9))
    table = grid_search(pairs, grid).rows
    valid = sum(b < c for c in grid.static_c_min for b in grid.static_b)
    excluded_ok = all(r.params["b"] < r.params["c_min"] for r in table)
    ok = winner == {"c_min": 3, "b": 1} and len(table) == valid and excluded_ok
    record_acceptance(9, ok, f"table rows {len(table)} / valid points {valid}, invalid excluded={excluded_ok}, "
                             f"blip scenario winner {winner}")
    assert ok
