import json
import math

import numpy as np
import pytest
from scipy.stats import lognorm
from hypothesis import given, strategies as st

from otalc.core import ClassMap, LabelStream, Segment, labels_from_segments
from otalc.cutoffs import (ClassBased, ClassLengthStats, ClassStat, Static, class_cutoff, fit_class_stats,
                           fit_lengths, lognormal_mean, lognormal_std, parse_policy, resolve_cutoff)


def stream_with_lengths(lengths_by_class, num_classes):
    """Alternate segments so same-class runs never touch."""
    segs, t = [], 0
    order = [(c, n) for c, ls in lengths_by_class.items() for n in ls]
    filler = num_classes - 1
    for c, n in order:
        segs.append(Segment(c, t, t + n - 1))
        t += n
        segs.append(Segment(filler, t, t))
        t += 1
    return labels_from_segments(segs, ClassMap.of_size(num_classes))


def stats_for(lengths, num_classes=3):
    return fit_class_stats([stream_with_lengths({0: lengths}, num_classes)])


def test_zero_variance_fit():
    st0 = stats_for([10, 10, 10, 10]).classes[0]
    assert st0.count == 4
    assert st0.mu_log == pytest.approx(math.log(10))
    assert st0.sigma_log == 0
    assert st0.mu_frames == pytest.approx(10)
    assert st0.sigma_frames == pytest.approx(0)


def test_three_nine_twentyseven():
    st0 = stats_for([3, 9, 27]).classes[0]
    # ln lengths are ln3 * (1, 2, 3): mean 2 ln3, sample std ln3
    assert st0.mu_log == pytest.approx(math.log(9), rel=1e-12)
    assert st0.sigma_log == pytest.approx(math.log(3), rel=1e-12)
    assert round(st0.mu_log, 4) == 2.1972
    assert round(st0.sigma_log, 4) == 1.0986
    # 9 * exp(ln(3)^2 / 2) = 16.456..; quoted elsewhere truncated as 16.45
    oracle = lognorm(s=math.log(3), scale=9.0)
    assert st0.mu_frames == pytest.approx(oracle.mean(), rel=1e-12)
    assert st0.sigma_frames == pytest.approx(oracle.std(), rel=1e-12)
    assert f"{st0.mu_frames:.4g}" == "16.46"
    assert f"{st0.sigma_frames:.4g}" == "25.19"


def test_absent_class_flagged():
    stats = stats_for([5, 6], num_classes=4)
    assert not stats.classes[1].present
    assert stats.get(1) is None


def test_single_observation_sigma_zero():
    assert fit_lengths([7]).sigma_log == 0.0


def test_streams_must_share_map():
    a = LabelStream((0,), ClassMap.of_size(2))
    b = LabelStream((0,), ClassMap.of_size(3))
    with pytest.raises(ValueError):
        fit_class_stats([a, b])


def test_class_cutoff_examples():
    assert class_cutoff(stats_for([10, 10, 10, 10]), 0, 2, 2) == 10
    assert class_cutoff(stats_for([3, 9, 27]), 0, 1.5, 4) == 4
    assert class_cutoff(stats_for([3, 9, 27]), 1, 1.0, 5) == 5


def test_log_space_cutoff():
    stats = stats_for([3, 9, 27])
    # exp(ln9 - 1 * ln3) = 3
    assert class_cutoff(stats, 0, 1.0, 1, space="log") == 3


def test_rounding_half_up():
    stats = ClassLengthStats((ClassStat(3, math.log(12.5), 0.0),))
    assert class_cutoff(stats, 0, 0.0, 1) == 13


def test_resolve_cutoff():
    assert resolve_cutoff(Static(9), 3) == 9
    pol = ClassBased(2, 2, stats_for([10, 10, 10, 10]))
    assert resolve_cutoff(pol, 0) == 10
    assert resolve_cutoff(pol, 1) == 2
    assert resolve_cutoff(pol, 99) == 2


@pytest.mark.parametrize("bad", [lambda: Static(0), lambda: ClassBased(-1, 2, ClassLengthStats(())),
                                 lambda: ClassBased(1, 0, ClassLengthStats(()))])
def test_policy_validation(bad):
    with pytest.raises(ValueError):
        bad()


@given(st.lists(st.integers(1, 200), min_size=1, max_size=12), st.floats(0, 3), st.floats(0, 3),
       st.integers(1, 20))
def test_cutoff_monotone_in_kappa(lengths, k1, k2, c_abs):
    stats = ClassLengthStats((fit_lengths(lengths),))
    lo, hi = sorted((k1, k2))
    a, b = class_cutoff(stats, 0, lo, c_abs), class_cutoff(stats, 0, hi, c_abs)
    assert b <= a
    assert b >= c_abs >= 1


def test_closed_forms_vs_monte_carlo():
    rng = np.random.default_rng(7)
    for _ in range(50):
        mu, sigma = rng.uniform(0, 4), rng.uniform(0.05, 0.8)
        x = np.exp(rng.normal(mu, sigma, 10**6))
        assert lognormal_mean(mu, sigma) == pytest.approx(x.mean(), rel=0.02)
        assert lognormal_std(mu, sigma) == pytest.approx(x.std(), rel=0.02)


def test_json_round_trip(tmp_path):
    stats = stats_for([3, 9, 27], num_classes=4)
    doc = stats.to_json()
    assert set(doc["classes"][0]) == {"id", "count", "mu_log", "sigma_log"}
    assert doc["classes"][1]["count"] == 0
    path = tmp_path / "stats.json"
    stats.dump(path)
    again = ClassLengthStats.load(path)
    assert again == stats
    assert again.classes[0].mu_frames == pytest.approx(stats.classes[0].mu_frames)
    json.loads(path.read_text())


def test_parse_policy(tmp_path):
    assert parse_policy("static:9") == Static(9)
    path = tmp_path / "s.json"
    stats_for([10, 10]).dump(path)
    pol = parse_policy(f"class:2,4:{path}")
    assert isinstance(pol, ClassBased) and pol.kappa == 2 and pol.c_abs_min == 4
    assert parse_policy(f"class-log:2,4:{path}").space == "log"
    with pytest.raises(ValueError):
        parse_policy("median:3")
