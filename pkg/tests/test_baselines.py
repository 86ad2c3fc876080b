import numpy as np
import pytest
from hypothesis import given, strategies as st

from otalc.baselines import (ModalSmoother, RecursiveAverager, as_softmax, modal_smooth, normalize,
                             read_softmax_csv, recursive_average, write_softmax_csv)


def test_recursive_average_trace():
    avg = RecursiveAverager(0.6)
    assert [avg.push(p) for p in ([0.8, 0.2], [0.2, 0.8], [0.2, 0.8])] == [0, 0, 1]
    assert avg.state == pytest.approx([0.416, 0.584])


def test_alpha_zero_is_argmax():
    rng = np.random.default_rng(0)
    frames = rng.dirichlet(np.ones(4), size=50)
    assert recursive_average(frames, 0.0) == list(np.argmax(frames, axis=1))


def test_constant_frames():
    assert set(recursive_average([[0.1, 0.7, 0.2]] * 20, 0.9)) == {1}


def test_argmax_tie_lowest():
    assert RecursiveAverager(0.5).push([0.5, 0.5]) == 0


@pytest.mark.parametrize("bad", [[0.5, 0.6], [-0.1, 1.1], [np.nan, 1.0]])
def test_malformed_softmax(bad):
    with pytest.raises(ValueError):
        RecursiveAverager(0.5).push(bad)


def test_width_mismatch():
    avg = RecursiveAverager(0.5)
    avg.push([0.5, 0.5])
    with pytest.raises(ValueError):
        avg.push([0.2, 0.3, 0.5])


def test_alpha_range():
    with pytest.raises(ValueError):
        RecursiveAverager(1.0)


@given(st.lists(st.lists(st.floats(0.01, 10), min_size=3, max_size=3), min_size=1, max_size=30),
       st.floats(0.1, 100), st.floats(0, 0.95))
def test_scale_invariance(scores, scale, alpha):
    base = [normalize(s) for s in scores]
    scaled = [normalize(np.asarray(s) * scale) for s in scores]
    assert recursive_average(base, alpha) == recursive_average(scaled, alpha)


def test_modal_example():
    A, B = 0, 1
    assert modal_smooth([A, B, A], 3) == [A, B, A]


def test_modal_window_one_identity():
    labels = [3, 1, 1, 2, 0, 3, 3]
    assert modal_smooth(labels, 1) == labels


def test_modal_constant():
    assert modal_smooth([2] * 10, 4) == [2] * 10


def test_modal_removes_blip():
    assert modal_smooth([0, 0, 0, 1, 0, 0], 3) == [0] * 6


def test_modal_window_validation():
    with pytest.raises(ValueError):
        ModalSmoother(0)


@given(st.lists(st.integers(0, 3), max_size=60), st.integers(1, 8))
def test_modal_matches_brute_force(labels, w):
    out = modal_smooth(labels, w)
    for t, y in enumerate(out):
        window = labels[max(0, t - w + 1):t + 1]
        counts = {c: window.count(c) for c in window}
        top = max(counts.values())
        recent = next(c for c in reversed(window) if counts[c] == top)
        assert y == recent


def test_softmax_csv_round_trip(tmp_path):
    frames = np.random.default_rng(1).dirichlet(np.ones(5), size=10)
    write_softmax_csv(tmp_path / "p.csv", frames)
    back = read_softmax_csv(tmp_path / "p.csv")
    assert np.array_equal(back, frames)
    for row in back:
        as_softmax(row, 5)
