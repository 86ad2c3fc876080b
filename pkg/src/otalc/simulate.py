"""Synthetic ground truth and corrupted prediction streams.

Ground truth is a Markov chain over classes with log-normal segment
lengths. Corruption models three error modes of frame-wise classifiers:
shifted boundaries, short wrong-label blips, and isolated substitutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ClassMap, LabelStream, Segment, labels_from_segments, rle_segments


@dataclass(frozen=True)
class GenModel:
    class_map: ClassMap
    mu_log: tuple[float, ...]
    sigma_log: tuple[float, ...]
    transitions: np.ndarray

    def __post_init__(self):
        n = len(self.class_map)
        object.__setattr__(self, "mu_log", tuple(float(x) for x in self.mu_log))
        object.__setattr__(self, "sigma_log", tuple(float(x) for x in self.sigma_log))
        trans = np.asarray(self.transitions, dtype=float).reshape(n, n)
        object.__setattr__(self, "transitions", trans)
        if len(self.mu_log) != n or len(self.sigma_log) != n:
            raise ValueError("need one length distribution per class")
        if any(s < 0 for s in self.sigma_log):
            raise ValueError("sigma_log must be non-negative")
        if n > 1:
            if np.any(trans < 0) or np.any(np.abs(trans.sum(axis=1) - 1) > 1e-9):
                raise ValueError("transition rows must be non-negative and sum to 1")
            if np.any(np.diag(trans) != 0):
                raise ValueError("transition matrix must have a zero diagonal")

    @classmethod
    def uniform(cls, class_map: ClassMap, mu_log, sigma_log) -> "GenModel":
        """Equal-probability transitions to every other class."""
        n = len(class_map)
        mu = list(mu_log) if np.ndim(mu_log) else [mu_log] * n
        sigma = list(sigma_log) if np.ndim(sigma_log) else [sigma_log] * n
        if n > 1:
            trans = (np.ones((n, n)) - np.eye(n)) / (n - 1)
        else:
            trans = np.zeros((1, 1))
        return cls(class_map, tuple(mu), tuple(sigma), trans)

    def to_json(self) -> dict:
        return {
            "classes": list(self.class_map.names),
            "mu_log": list(self.mu_log),
            "sigma_log": list(self.sigma_log),
            "transitions": self.transitions.tolist(),
        }


@dataclass(frozen=True)
class NoiseConfig:
    blip_rate: float = 0.0
    blip_len_max: int = 0
    boundary_jitter_max: int = 0
    sub_rate: float = 0.0

    def __post_init__(self):
        for name in ("blip_rate", "sub_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.blip_len_max < 0 or self.boundary_jitter_max < 0:
            raise ValueError("lengths must be >= 0")


def draw_length(model: GenModel, label: int, rng: np.random.Generator) -> int:
    return max(1, int(round(rng.lognormal(model.mu_log[label], model.sigma_log[label]))))


def gen_ground_truth(model: GenModel, total_frames: int, rng: np.random.Generator) -> LabelStream:
    n = len(model.class_map)
    labels: list[int] = []
    if total_frames <= 0 or n == 0:
        return LabelStream((), model.class_map)
    current = int(rng.integers(n))
    while len(labels) < total_frames:
        labels.extend([current] * draw_length(model, current, rng))
        if n > 1:
            current = int(rng.choice(n, p=model.transitions[current]))
    return LabelStream(tuple(labels[:total_frames]), model.class_map)


def _other_label(label: int, n: int, rng: np.random.Generator) -> int:
    k = int(rng.integers(n - 1))
    return k + 1 if k >= label else k


def jitter_boundaries(segs: list[Segment], max_shift: int, rng: np.random.Generator) -> list[Segment]:
    """Move every internal boundary by up to ``max_shift`` frames, keeping segments non-empty."""
    if max_shift == 0 or len(segs) < 2:
        return segs
    starts = [s.start for s in segs] + [segs[-1].end + 1]
    for k in range(1, len(segs)):
        lo = max(starts[k] - max_shift, starts[k - 1] + 1)
        hi = min(starts[k] + max_shift, starts[k + 1] - 1)
        starts[k] = int(rng.integers(lo, hi + 1))
    return [Segment(s.label, starts[k], starts[k + 1] - 1) for k, s in enumerate(segs)]


def insert_blips(labels: list[int], segs: Sequence[Segment], noise: NoiseConfig, n: int,
                 rng: np.random.Generator) -> None:
    """Overwrite a short run strictly inside a segment with a different label.

    Blips never touch a segment's first or last frame, so each one adds
    exactly two boundaries. Segments too short to host one are skipped.
    """
    if noise.blip_rate == 0 or noise.blip_len_max == 0 or n < 2:
        return
    for seg in segs:
        if rng.random() >= noise.blip_rate:
            continue
        room = seg.length - 2
        if room < 1:
            continue
        length = int(rng.integers(1, min(noise.blip_len_max, room) + 1))
        at = int(rng.integers(seg.start + 1, seg.end - length + 1))
        wrong = _other_label(seg.label, n, rng)
        labels[at:at + length] = [wrong] * length


def corrupt(gt: LabelStream, noise: NoiseConfig, rng: np.random.Generator) -> LabelStream:
    n = len(gt.class_map)
    segs = jitter_boundaries(rle_segments(gt), noise.boundary_jitter_max, rng)
    labels = list(labels_from_segments(segs, gt.class_map).labels)
    insert_blips(labels, segs, noise, n, rng)
    if noise.sub_rate > 0 and n > 1:
        flips = rng.random(len(labels)) < noise.sub_rate
        for i in np.flatnonzero(flips):
            labels[i] = _other_label(labels[i], n, rng)
    return LabelStream(tuple(labels), gt.class_map)


def to_softmax(stream: LabelStream, eps: float = 0.1, num_classes: Optional[int] = None) -> np.ndarray:
    """One-hot-ish frames: ``1 - eps`` on the label, the rest spread evenly."""
    n = num_classes or len(stream.class_map)
    if n == 1:
        return np.ones((len(stream), 1))
    out = np.full((len(stream), n), eps / (n - 1))
    out[np.arange(len(stream)), np.asarray(stream.labels, dtype=int)] = 1.0 - eps
    return out
