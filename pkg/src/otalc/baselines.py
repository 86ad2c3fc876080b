"""Causal smoothing baselines: exponential averaging of softmax frames and
sliding-window modal filtering of hard labels."""

from __future__ import annotations

import csv
from collections import Counter, deque
from typing import Iterable, Optional, Sequence

import numpy as np


def as_softmax(probs: Sequence[float], num_classes: Optional[int] = None, atol: float = 1e-6) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or (num_classes is not None and p.shape[0] != num_classes):
        raise ValueError(f"softmax frame must have {num_classes} entries, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("softmax frame has negative or non-finite entries")
    if abs(p.sum() - 1.0) > atol:
        raise ValueError(f"softmax frame sums to {p.sum():.8f}, not 1")
    return p


def normalize(scores: Sequence[float]) -> np.ndarray:
    s = np.asarray(scores, dtype=float)
    return s / s.sum()


class RecursiveAverager:
    """``state <- alpha * state + (1 - alpha) * p_t``; label is the argmax (lowest id on ties)."""

    def __init__(self, alpha: float, num_classes: Optional[int] = None):
        if not 0.0 <= alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {alpha}")
        self.alpha = alpha
        self.num_classes = num_classes
        self.state: Optional[np.ndarray] = None

    def push(self, probs: Sequence[float]) -> int:
        p = as_softmax(probs, self.num_classes)
        if self.state is None:
            self.num_classes = p.shape[0]
            self.state = p.copy()
        else:
            self.state = self.alpha * self.state + (1.0 - self.alpha) * p
        # np.argmax returns the first maximum
        return int(np.argmax(self.state))


class ModalSmoother:
    """Mode of the last ``w`` raw labels; ties go to the most recently seen label."""

    def __init__(self, w: int):
        if w < 1:
            raise ValueError(f"window must be >= 1, got {w}")
        self.w = w
        self.window: deque[int] = deque(maxlen=w)
        self.counts: Counter = Counter()

    def push(self, y: int) -> int:
        if len(self.window) == self.w:
            old = self.window[0]
            self.counts[old] -= 1
            if not self.counts[old]:
                del self.counts[old]
        self.window.append(y)
        self.counts[y] += 1
        best = max(self.counts.values())
        for label in reversed(self.window):
            if self.counts[label] == best:
                return label
        raise AssertionError("unreachable")


def recursive_average(frames: Iterable[Sequence[float]], alpha: float) -> list[int]:
    avg = RecursiveAverager(alpha)
    return [avg.push(p) for p in frames]


def modal_smooth(labels: Iterable[int], w: int) -> list[int]:
    sm = ModalSmoother(w)
    return [sm.push(y) for y in labels]


def read_softmax_csv(path) -> np.ndarray:
    """One row per frame, one column per class, no header."""
    with open(path, newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    if not rows:
        return np.zeros((0, 0))
    width = len(rows[0])
    for i, row in enumerate(rows, 1):
        if len(row) != width:
            raise ValueError(f"{path}: line {i} has {len(row)} columns, expected {width}")
    return np.asarray(rows)


def write_softmax_csv(path, frames: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in frames:
            writer.writerow([repr(float(x)) for x in row])
