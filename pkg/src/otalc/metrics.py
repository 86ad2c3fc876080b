"""Frame accuracy, segmental F1@IoU, edit score and per-class segment scores."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import LabelStream, Segment, rle_segments

DEFAULT_THRESHOLDS = (0.1, 0.25, 0.5)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class SegmentCounts:
    tp: int
    fp: int
    fn: int

    def __add__(self, other: "SegmentCounts") -> "SegmentCounts":
        return SegmentCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def prf(self) -> PRF:
        return prf_from_counts(self.tp, self.fp, self.fn)


def _ratio(num: int, den: int, both_empty: bool) -> float:
    if den == 0:
        return 1.0 if both_empty else 0.0
    return num / den


def prf_from_counts(tp: int, fp: int, fn: int) -> PRF:
    empty = tp + fp + fn == 0
    p = _ratio(tp, tp + fp, empty)
    r = _ratio(tp, tp + fn, empty)
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return PRF(p, r, f1)


def _labels(s) -> Sequence[int]:
    return s.labels if isinstance(s, LabelStream) else s


def _check_lengths(pred, gt) -> None:
    if len(pred) != len(gt):
        raise ValueError(f"length mismatch: pred has {len(pred)} frames, gt has {len(gt)}")


def _frame_counts(p, g, ignore) -> tuple[int, int]:
    if not ignore:
        return sum(a == b for a, b in zip(p, g)), len(g)
    kept = [(a, b) for a, b in zip(p, g) if b not in ignore]
    return sum(a == b for a, b in kept), len(kept)


def mof_accuracy(pred, gt, *, ignore: frozenset = frozenset()) -> float:
    """Fraction of matching frames; frames whose gt label is in ``ignore`` are skipped."""
    p, g = _labels(pred), _labels(gt)
    _check_lengths(p, g)
    correct, total = _frame_counts(p, g, ignore)
    return correct / total if total else 1.0


def segment_iou(a: Segment, b: Segment) -> float:
    inter = min(a.end, b.end) - max(a.start, b.start) + 1
    if inter <= 0:
        return 0.0
    return inter / (a.length + b.length - inter)


def _segments(labels, ignore) -> list[Segment]:
    segs = rle_segments(labels)
    return [s for s in segs if s.label not in ignore] if ignore else segs


def segment_counts(pred, gt, threshold: float, *, ignore: frozenset = frozenset()) -> SegmentCounts:
    """Greedy matching: predicted segments in temporal order each claim the
    unmatched same-class ground-truth segment of highest IoU (earliest on ties)."""
    p, g = _labels(pred), _labels(gt)
    _check_lengths(p, g)
    gt_segs = _segments(g, ignore)
    matched = [False] * len(gt_segs)
    tp = fp = 0
    for ps in _segments(p, ignore):
        best, best_iou = -1, -1.0
        for k, gs in enumerate(gt_segs):
            if matched[k] or gs.label != ps.label:
                continue
            iou = segment_iou(ps, gs)
            if iou > best_iou:
                best, best_iou = k, iou
        if best >= 0 and best_iou >= threshold:
            matched[best] = True
            tp += 1
        else:
            fp += 1
    return SegmentCounts(tp, fp, len(gt_segs) - tp)


def f1_at_iou(pred, gt, threshold: float, *, ignore: frozenset = frozenset()) -> PRF:
    if not 0 < threshold <= 1:
        raise ValueError(f"IoU threshold must be in (0, 1], got {threshold}")
    return segment_counts(pred, gt, threshold, ignore=ignore).prf()


def levenshtein(a: Sequence, b: Sequence) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


def segment_labels(stream, ignore: frozenset = frozenset()) -> list[int]:
    return [s.label for s in _segments(_labels(stream), ignore)]


def edit_score(pred, gt, *, ignore: frozenset = frozenset()) -> float:
    p, g = segment_labels(pred, ignore), segment_labels(gt, ignore)
    longest = max(len(p), len(g))
    if longest == 0:
        return 100.0
    return 100.0 * (1.0 - levenshtein(p, g) / longest)


@dataclass(frozen=True)
class ClassSegmentScores:
    per_class: dict[int, PRF]
    mean: PRF
    min: PRF


def _majority(labels: Sequence[int]) -> int:
    counts: dict[int, int] = {}
    for x in labels:
        counts[x] = counts.get(x, 0) + 1
    top = max(counts.values())
    return min(c for c, n in counts.items() if n == top)


def segment_votes(pred, gt) -> list[tuple[int, int]]:
    """(gt_class, majority predicted class) for every ground-truth segment."""
    p, g = _labels(pred), _labels(gt)
    _check_lengths(p, g)
    return [(s.label, _majority(p[s.start:s.end + 1])) for s in rle_segments(g)]


def per_class_segment_prf(pred, gt, *, votes: Optional[Sequence[tuple[int, int]]] = None) -> ClassSegmentScores:
    if votes is None:
        votes = segment_votes(pred, gt)
    classes = sorted({c for pair in votes for c in pair})
    per_class: dict[int, PRF] = {}
    for c in classes:
        tp = sum(1 for g, p in votes if g == c and p == c)
        fp = sum(1 for g, p in votes if g != c and p == c)
        fn = sum(1 for g, p in votes if g == c and p != c)
        per_class[c] = prf_from_counts(tp, fp, fn)
    if not per_class:
        one = PRF(1.0, 1.0, 1.0)
        return ClassSegmentScores({}, one, one)
    vals = list(per_class.values())
    mean = PRF(*(sum(getattr(v, f) for v in vals) / len(vals) for f in ("precision", "recall", "f1")))
    low = PRF(*(min(getattr(v, f) for v in vals) for f in ("precision", "recall", "f1")))
    return ClassSegmentScores(per_class, mean, low)


@dataclass(frozen=True)
class MetricsReport:
    acc: float
    f1: dict[float, PRF]
    edit: float
    counts: dict[float, SegmentCounts] = field(default_factory=dict, compare=False)
    frames: int = field(default=0, compare=False)
    correct: int = field(default=0, compare=False)

    def f1_at(self, threshold: float) -> float:
        return self.f1[threshold].f1

    def row(self) -> dict[str, float]:
        out = {"acc": self.acc}
        for thr in sorted(self.f1):
            out[threshold_key(thr)] = self.f1[thr].f1
        out["edit"] = self.edit
        return out

    def header(self) -> str:
        return ",".join(self.row())

    def csv_row(self) -> str:
        return ",".join(f"{v:.4f}" for v in self.row().values())

    def to_json(self) -> str:
        return json.dumps({k: round(v, 4) for k, v in self.row().items()})


def threshold_key(thr: float) -> str:
    return f"f1_{round(thr * 100):03d}"


CSV_HEADER = "acc," + ",".join(threshold_key(t) for t in DEFAULT_THRESHOLDS) + ",edit"


def report(pred, gt, thresholds: Iterable[float] = DEFAULT_THRESHOLDS,
           *, ignore: frozenset = frozenset()) -> MetricsReport:
    p, g = _labels(pred), _labels(gt)
    _check_lengths(p, g)
    thresholds = sorted(set(thresholds))
    for thr in thresholds:
        if not 0 < thr <= 1:
            raise ValueError(f"IoU threshold must be in (0, 1], got {thr}")
    counts = {thr: segment_counts(p, g, thr, ignore=ignore) for thr in thresholds}
    correct, total = _frame_counts(p, g, ignore)
    return MetricsReport(
        acc=correct / total if total else 1.0,
        f1={thr: c.prf() for thr, c in counts.items()},
        edit=edit_score(p, g, ignore=ignore),
        counts=counts,
        frames=total,
        correct=correct,
    )


def pool_reports(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Aggregate sequences: TP/FP/FN and frames pooled, edit averaged per sequence."""
    if not reports:
        raise ValueError("nothing to pool")
    thresholds = sorted(reports[0].counts)
    counts = {}
    for thr in thresholds:
        total = SegmentCounts(0, 0, 0)
        for r in reports:
            total = total + r.counts[thr]
        counts[thr] = total
    frames = sum(r.frames for r in reports)
    correct = sum(r.correct for r in reports)
    return MetricsReport(
        acc=correct / frames if frames else 1.0,
        f1={thr: c.prf() for thr, c in counts.items()},
        edit=sum(r.edit for r in reports) / len(reports),
        counts=counts,
        frames=frames,
        correct=correct,
    )


def evaluate(pairs: Iterable[tuple[object, object]], thresholds: Iterable[float] = DEFAULT_THRESHOLDS,
             *, ignore: frozenset = frozenset()) -> MetricsReport:
    thresholds = tuple(thresholds)
    return pool_reports([report(p, g, thresholds, ignore=ignore) for p, g in pairs])
