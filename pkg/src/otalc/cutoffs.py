"""Per-class segment-length statistics and minimum-segment cutoffs.

Segment lengths are modelled as log-normal. The class-based cutoff is
``mean - kappa * std`` of that distribution in frames, floored at an
absolute minimum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .core import LabelStream, rle_segments


@dataclass(frozen=True)
class ClassStat:
    count: int
    mu_log: float = 0.0
    sigma_log: float = 0.0

    @property
    def present(self) -> bool:
        return self.count > 0

    @property
    def mu_frames(self) -> float:
        return lognormal_mean(self.mu_log, self.sigma_log)

    @property
    def sigma_frames(self) -> float:
        return lognormal_std(self.mu_log, self.sigma_log)


def lognormal_mean(mu_log: float, sigma_log: float) -> float:
    return math.exp(mu_log + sigma_log**2 / 2)


def lognormal_std(mu_log: float, sigma_log: float) -> float:
    s2 = sigma_log**2
    return math.sqrt(math.expm1(s2) * math.exp(2 * mu_log + s2))


@dataclass(frozen=True)
class ClassLengthStats:
    classes: tuple[ClassStat, ...]

    def __len__(self) -> int:
        return len(self.classes)

    def get(self, class_id: int) -> Optional[ClassStat]:
        if 0 <= class_id < len(self.classes) and self.classes[class_id].present:
            return self.classes[class_id]
        return None

    def to_json(self) -> dict:
        rows = []
        for i, st in enumerate(self.classes):
            rows.append({
                "id": i,
                "count": st.count,
                "mu_log": st.mu_log if st.present else None,
                "sigma_log": st.sigma_log if st.present else None,
            })
        return {"classes": rows}

    @classmethod
    def from_json(cls, doc: dict) -> "ClassLengthStats":
        rows = sorted(doc["classes"], key=lambda r: r["id"])
        if [r["id"] for r in rows] != list(range(len(rows))):
            raise ValueError("class ids in stats document must be dense from 0")
        stats = []
        for r in rows:
            if r["count"] > 0:
                stats.append(ClassStat(int(r["count"]), float(r["mu_log"]), float(r["sigma_log"])))
            else:
                stats.append(ClassStat(0))
        return cls(tuple(stats))

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "ClassLengthStats":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def fit_lengths(lengths: Sequence[int]) -> ClassStat:
    """Moment-match a log-normal to observed segment lengths (n-1 std, 0 for n=1)."""
    if len(lengths) == 0:
        return ClassStat(0)
    logs = np.log(np.asarray(lengths, dtype=float))
    sigma = float(np.std(logs, ddof=1)) if len(logs) > 1 else 0.0
    return ClassStat(len(logs), float(np.mean(logs)), sigma)


def fit_class_stats(gt_streams: Sequence[LabelStream], num_classes: Optional[int] = None) -> ClassLengthStats:
    if num_classes is None:
        if not gt_streams:
            raise ValueError("need at least one stream or an explicit num_classes")
        num_classes = len(gt_streams[0].class_map)
    for s in gt_streams[1:]:
        if s.class_map != gt_streams[0].class_map:
            raise ValueError("streams do not share one class map")
    pooled: list[list[int]] = [[] for _ in range(num_classes)]
    for stream in gt_streams:
        for seg in rle_segments(stream):
            pooled[seg.label].append(seg.length)
    return ClassLengthStats(tuple(fit_lengths(ls) for ls in pooled))


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def class_cutoff(stats: ClassLengthStats, class_id: int, kappa: float, c_abs_min: int,
                 *, space: str = "frames") -> int:
    """Minimum confirmed-segment length for one class.

    ``space="frames"`` uses the log-normal mean/std in frames;
    ``space="log"`` uses ``exp(mu_log - kappa * sigma_log)`` instead.
    Absent classes fall back to ``c_abs_min``.
    """
    st = stats.get(class_id)
    if st is None:
        return max(1, c_abs_min)
    if space == "frames":
        raw = st.mu_frames - kappa * st.sigma_frames
    elif space == "log":
        raw = math.exp(st.mu_log - kappa * st.sigma_log)
    else:
        raise ValueError(f"unknown cutoff space {space!r}")
    return max(1, c_abs_min, round_half_up(raw))


@dataclass(frozen=True)
class Static:
    c_min: int

    def __post_init__(self):
        if self.c_min < 1:
            raise ValueError(f"c_min must be >= 1, got {self.c_min}")

    def cutoff(self, class_id: int) -> int:
        return self.c_min

    def class_ids(self) -> range:
        # every class shares one cutoff
        return range(1)


@dataclass(frozen=True)
class ClassBased:
    kappa: float
    c_abs_min: int
    stats: ClassLengthStats
    space: str = "frames"
    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.c_abs_min < 1:
            raise ValueError(f"c_abs_min must be >= 1, got {self.c_abs_min}")
        if self.space not in ("frames", "log"):
            raise ValueError(f"unknown cutoff space {self.space!r}")

    def cutoff(self, class_id: int) -> int:
        try:
            return self._memo[class_id]
        except KeyError:
            val = class_cutoff(self.stats, class_id, self.kappa, self.c_abs_min, space=self.space)
            self._memo[class_id] = val
            return val

    def class_ids(self) -> range:
        return range(len(self.stats))


CutoffPolicy = Union[Static, ClassBased]


def resolve_cutoff(policy: CutoffPolicy, class_id: int) -> int:
    return policy.cutoff(class_id)


def parse_policy(text: str) -> CutoffPolicy:
    """Parse ``static:<n>`` or ``class:<kappa>,<abs>:<stats.json>`` (optionally ``class-log:``)."""
    kind, _, rest = text.partition(":")
    if kind == "static":
        return Static(int(rest))
    if kind in ("class", "class-log"):
        params, _, path = rest.partition(":")
        kappa, _, c_abs = params.partition(",")
        if not path:
            raise ValueError("class cutoff needs a stats file: class:<kappa>,<abs>:<stats.json>")
        space = "log" if kind == "class-log" else "frames"
        return ClassBased(float(kappa), int(c_abs), ClassLengthStats.load(path), space=space)
    raise ValueError(f"unknown cutoff policy {text!r}")
