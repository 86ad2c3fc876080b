"""Clip frame-index samplers for training (dense / surround) and online inference.

All functions return plain frame indices; nothing here touches pixels.
``rng`` is a :class:`numpy.random.Generator` owned by the caller.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import Segment


@dataclass(frozen=True)
class ClipSpec:
    T: int
    tau: int

    def __post_init__(self):
        if self.T < 1 or self.tau < 1:
            raise ValueError(f"need T >= 1 and tau >= 1, got T={self.T}, tau={self.tau}")

    @property
    def span(self) -> int:
        return self.T * self.tau

    @property
    def half_span(self) -> int:
        # odd spans round down
        return self.span // 2


class BoundaryPolicy(enum.Enum):
    CLAMP_REPEAT = "clamp"
    WRAP = "wrap"


def dense_train_start(seg: Segment, spec: ClipSpec, rng: np.random.Generator) -> int:
    """Conventional start draw: the whole clip sits inside the segment when it fits."""
    _, n_s, n_e = seg
    if n_e - n_s > spec.span:
        return int(rng.integers(n_s, n_e - spec.span + 1))
    return n_s


def surround_start_range(seg: Segment, spec: ClipSpec) -> tuple[int, int]:
    """Inclusive raw start range before clamping at frame 0."""
    _, n_s, n_e = seg
    return n_s - spec.half_span, n_e - spec.half_span


def surround_train_start(seg: Segment, spec: ClipSpec, rng: np.random.Generator) -> int:
    """Start draw letting the clip extend half a span past either segment boundary."""
    lo, hi = surround_start_range(seg, spec)
    return max(0, int(rng.integers(lo, hi + 1)))


def raw_clip_indices(start: int, spec: ClipSpec) -> list[int]:
    return [start + k * spec.tau for k in range(spec.T)]


def clip_indices(start: int, spec: ClipSpec, policy: BoundaryPolicy, video_len: int) -> list[int]:
    if video_len < 1:
        raise ValueError("video_len must be >= 1")
    raw = raw_clip_indices(start, spec)
    if policy is BoundaryPolicy.CLAMP_REPEAT:
        return [min(max(i, 0), video_len - 1) for i in raw]
    return [((i % video_len) + video_len) % video_len for i in raw]


def inference_clip_indices(t: int, spec: ClipSpec, *, include_current: bool = False) -> list[int]:
    """Causal sliding-window clip for the prediction emitted at frame ``t``.

    By default the clip starts ``span`` frames back and its last index is
    ``t - tau``; ``include_current=True`` shifts it to end exactly at ``t``.
    Indices before the stream start are clamped to 0.
    """
    start = t - spec.span
    if include_current:
        start += spec.tau
    return [max(0, i) for i in raw_clip_indices(start, spec)]


def inference_start(t: int, spec: ClipSpec, *, include_current: bool = False) -> int:
    """Unclamped first index of :func:`inference_clip_indices`."""
    return t - spec.span + (spec.tau if include_current else 0)
