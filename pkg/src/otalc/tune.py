"""Exhaustive grid search over cleaner hyper-parameters on validation pairs."""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

from .cleaner import CleanerConfig, InvalidConfig, clean
from .core import LabelStream
from .cutoffs import ClassBased, ClassLengthStats, Static
from .metrics import MetricsReport, evaluate

OBJECTIVES = ("f1", "edit", "acc", "mean_f1_plus_edit")


@dataclass(frozen=True)
class GridSpec:
    """Candidate values for one search mode.

    ``mode="static"`` crosses ``static_c_min`` with ``static_b``;
    ``mode="class"`` crosses ``kappa``, ``c_abs_min`` and ``class_b``. When
    ``class_b`` is empty, b ranges over ``1 .. c_abs_min - 1`` for each
    ``c_abs_min``.
    """

    mode: str = "static"
    static_c_min: tuple[int, ...] = ()
    static_b: tuple[int, ...] = ()
    kappa: tuple[float, ...] = ()
    c_abs_min: tuple[int, ...] = ()
    class_b: tuple[int, ...] = ()
    objective: str = "f1"
    threshold: float = 0.5
    space: str = "frames"

    def __post_init__(self):
        for name in ("static_c_min", "static_b", "kappa", "c_abs_min", "class_b"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.mode not in ("static", "class"):
            raise ValueError(f"unknown grid mode {self.mode!r}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}; pick one of {OBJECTIVES}")
        if self.mode == "static" and not (self.static_c_min and self.static_b):
            raise ValueError("static grid needs static_c_min and static_b values")
        if self.mode == "class" and not (self.kappa and self.c_abs_min):
            raise ValueError("class grid needs kappa and c_abs_min values")

    def points(self) -> list[dict]:
        if self.mode == "static":
            return [{"c_min": c, "b": b} for c, b in product(self.static_c_min, self.static_b)]
        pts = []
        for kappa, c_abs in product(self.kappa, self.c_abs_min):
            bs = self.class_b or range(1, c_abs)
            pts.extend({"kappa": kappa, "c_abs_min": c_abs, "b": b} for b in bs)
        return pts

    @classmethod
    def from_json(cls, doc: dict) -> "GridSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown grid keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass(frozen=True)
class GridRow:
    params: dict
    config: CleanerConfig = field(repr=False)
    report: MetricsReport
    score: tuple[float, float]


@dataclass(frozen=True)
class GridResult:
    best: GridRow
    rows: tuple[GridRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        param_keys = list(self.rows[0].params)
        metric_keys = list(self.rows[0].report.row())
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(param_keys + metric_keys)
        for r in self.rows:
            writer.writerow([r.params[k] for k in param_keys] + [f"{v:.4f}" for v in r.report.row().values()])
        return buf.getvalue()


def objective_value(rep: MetricsReport, objective: str, threshold: float = 0.5) -> tuple[float, float]:
    """Primary score plus edit score as tie-break; everything on a 0-100 scale."""
    if objective == "f1":
        primary = 100 * rep.f1_at(threshold)
    elif objective == "edit":
        primary = rep.edit
    elif objective == "acc":
        primary = 100 * rep.acc
    else:
        vals = [100 * prf.f1 for prf in rep.f1.values()] + [rep.edit]
        primary = sum(vals) / len(vals)
    return primary, rep.edit


def build_config(grid: GridSpec, params: dict, stats: Optional[ClassLengthStats],
                 num_classes: int) -> Optional[CleanerConfig]:
    """Config for one grid point, or ``None`` when it breaks ``b < cutoff``."""
    try:
        if grid.mode == "static":
            policy = Static(params["c_min"])
        else:
            policy = ClassBased(params["kappa"], params["c_abs_min"], stats, space=grid.space)
        cfg = CleanerConfig(policy, params["b"])
        cfg.check(range(num_classes))
    except InvalidConfig:
        return None
    return cfg


def _tie_key(params: dict) -> tuple:
    return (params.get("c_min", params.get("c_abs_min")), params["b"], params.get("kappa", 0))


def _evaluate_point(args):
    cfg, pairs, thresholds = args
    return evaluate([(clean(raw, cfg), gt) for raw, gt in pairs], thresholds)


def grid_search(pairs: Sequence[tuple[LabelStream, LabelStream]], grid: GridSpec,
                stats: Optional[ClassLengthStats] = None, *, workers: int = 1) -> GridResult:
    if not pairs:
        raise ValueError("grid search needs at least one (raw, gt) pair")
    if grid.mode == "class" and stats is None:
        raise ValueError("class-based grid search needs fitted class statistics")
    num_classes = len(pairs[0][0].class_map)
    candidates = []
    for params in grid.points():
        cfg = build_config(grid, params, stats, num_classes)
        if cfg is not None:
            candidates.append((params, cfg))
    if not candidates:
        raise ValueError("no valid configuration in the grid (every point has b >= cutoff)")

    thresholds = sorted({0.1, 0.25, 0.5, grid.threshold})
    jobs = [(cfg, pairs, thresholds) for _, cfg in candidates]
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_evaluate_point, jobs))
    else:
        reports = [_evaluate_point(j) for j in jobs]

    rows = [GridRow(params, cfg, rep, objective_value(rep, grid.objective, grid.threshold))
            for (params, cfg), rep in zip(candidates, reports)]
    rows.sort(key=lambda r: (-r.score[0], -r.score[1], _tie_key(r.params)))
    return GridResult(rows[0], tuple(rows))


def load_grid(path) -> GridSpec:
    with open(path) as fh:
        return GridSpec.from_json(json.load(fh))
