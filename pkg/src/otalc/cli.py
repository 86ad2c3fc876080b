"""Command-line entry point: ``otalc <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import baselines, metrics, sampling, simulate
from .cleaner import Cleaner, CleanerConfig, Finalize, InvalidConfig, format_event
from .core import ClassMap, Segment
from .cutoffs import ClassLengthStats, fit_class_stats, parse_policy
from .dataset import (DataError, DatasetLayout, parse_labels, parse_mapping,
                      write_labels, write_mapping)
from .tune import grid_search, load_grid

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threads() -> int:
    try:
        return int(os.environ.get("OTALC_THREADS", "1"))
    except ValueError:
        raise UsageError("OTALC_THREADS must be an integer") from None


def _config(args, class_map: ClassMap) -> CleanerConfig:
    try:
        cfg = CleanerConfig(parse_policy(args.cutoff), args.b)
        cfg.check(range(len(class_map)))
    except (InvalidConfig, ValueError, OSError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    return cfg


def _thresholds(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x)
    except ValueError:
        raise UsageError(f"bad threshold list {text!r}") from None
    if not vals or any(not 0 < v <= 1 for v in vals):
        raise UsageError("thresholds must lie in (0, 1]")
    return vals


def cmd_clean(args) -> int:
    class_map = parse_mapping(args.mapping)
    cfg = _config(args, class_map)
    cleaner = Cleaner(cfg, class_map, keep_history=False)
    out = sys.stdout
    for lineno, line in enumerate(sys.stdin, 1):
        name = line.strip()
        if not name:
            continue
        try:
            y = class_map.index(name)
        except KeyError:
            raise DataError(f"unknown label {name!r}", "<stdin>", lineno) from None
        for ev in cleaner.push(y):
            out.write(format_event(ev, class_map))
        out.flush()
    for ev in cleaner.finalize(Finalize(args.finalize)):
        out.write(format_event(ev, class_map))
    out.flush()
    return EXIT_OK


def _load_pairs(layout: DatasetLayout, class_map: ClassMap, problems: list[str]):
    pairs = []
    for name in layout.sequences("pred"):
        gt_path = layout.gt_dir / name
        if not gt_path.is_file():
            problems.append(f"{name}: missing ground-truth file {gt_path}")
            continue
        pred = parse_labels(layout.pred_dir / name, class_map)
        gt = parse_labels(gt_path, class_map)
        if len(pred) != len(gt):
            problems.append(f"{name}: length mismatch (pred {len(pred)}, gt {len(gt)})")
            continue
        pairs.append((name, pred, gt))
    return pairs


def cmd_eval(args) -> int:
    layout = DatasetLayout(Path(args.gt_dir), Path(args.pred_dir), Path(args.mapping))
    class_map = layout.class_map()
    thresholds = _thresholds(args.thresholds)
    ignore = frozenset(class_map.index(n) for n in args.ignore.split(",") if n) if args.ignore else frozenset()
    problems: list[str] = []
    pairs = _load_pairs(layout, class_map, problems)
    reports = [(name, metrics.report(p, g, thresholds, ignore=ignore)) for name, p, g in pairs]
    if args.format == "json":
        doc = {name: rep.row() for name, rep in reports}
        if reports:
            doc["POOLED"] = metrics.pool_reports([r for _, r in reports]).row()
        print(json.dumps({k: {m: round(v, 4) for m, v in row.items()} for k, row in doc.items()}, indent=2))
    else:
        if reports:
            print("sequence," + reports[0][1].header())
            for name, rep in reports:
                print(f"{name},{rep.csv_row()}")
            print(f"POOLED,{metrics.pool_reports([r for _, r in reports]).csv_row()}")
    for msg in problems:
        print(f"skipped {msg}", file=sys.stderr)
    return EXIT_DATA if problems else EXIT_OK


def cmd_fit_stats(args) -> int:
    class_map = parse_mapping(args.mapping)
    gt_dir = Path(args.gt_dir)
    streams = [parse_labels(p, class_map) for p in sorted(gt_dir.iterdir())
               if p.is_file() and not p.name.startswith(".")]
    stats = fit_class_stats(streams, num_classes=len(class_map))
    text = json.dumps(stats.to_json(), indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_tune(args) -> int:
    layout = DatasetLayout(Path(args.gt_dir), Path(args.pred_dir), Path(args.mapping))
    class_map = layout.class_map()
    try:
        grid = load_grid(args.grid)
    except (ValueError, TypeError, OSError) as exc:
        raise UsageError(f"bad grid file: {exc}") from None
    stats = ClassLengthStats.load(args.stats) if args.stats else None
    if grid.mode == "class" and stats is None:
        raise UsageError("class-based grids need --stats")
    problems: list[str] = []
    pairs = [(p, g) for _, p, g in _load_pairs(layout, class_map, problems)]
    for msg in problems:
        print(f"skipped {msg}", file=sys.stderr)
    if not pairs:
        raise DataError("no usable sequences")
    try:
        result = grid_search(pairs, grid, stats, workers=_threads())
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = result.to_csv()
    if args.output:
        Path(args.output).write_text(table)
    else:
        sys.stdout.write(table)
    print("best " + json.dumps(result.best.params), file=sys.stderr)
    return EXIT_DATA if problems else EXIT_OK


def cmd_simulate(args) -> int:
    rng = np.random.default_rng(args.seed)
    class_map = ClassMap.of_size(args.classes)
    model = simulate.GenModel.uniform(class_map, args.mu_log, args.sigma_log)
    noise = simulate.NoiseConfig(args.blip_rate, args.blip_len_max, args.jitter, args.sub_rate)
    out = Path(args.out_dir)
    for sub in ("gt", "pred"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    if args.softmax:
        (out / "softmax").mkdir(exist_ok=True)
    write_mapping(out / "mapping.txt", class_map)
    for k in range(args.sequences):
        name = f"seq{k:03d}.txt"
        gt = simulate.gen_ground_truth(model, args.frames, rng)
        pred = simulate.corrupt(gt, noise, rng)
        write_labels(out / "gt" / name, gt)
        write_labels(out / "pred" / name, pred)
        if args.softmax:
            baselines.write_softmax_csv(out / "softmax" / f"seq{k:03d}.csv",
                                        simulate.to_softmax(pred, args.eps))
    manifest = {
        "seed": args.seed,
        "sequences": args.sequences,
        "frames": args.frames,
        "model": model.to_json(),
        "noise": vars(noise),
        "softmax_eps": args.eps if args.softmax else None,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = sampling.ClipSpec(args.T, args.tau)
    rng = np.random.default_rng(args.seed)
    policy = sampling.BoundaryPolicy(args.policy)
    if args.mode == "inference":
        if args.t is None:
            raise UsageError("--t is required for inference mode")
        print(" ".join(map(str, sampling.inference_clip_indices(args.t, spec, include_current=args.include_current))))
        return EXIT_OK
    if args.start is None or args.end is None or args.end < args.start:
        raise UsageError("--start and --end (start <= end) are required for training modes")
    seg = Segment(0, args.start, args.end)
    draw = sampling.dense_train_start if args.mode == "dense" else sampling.surround_train_start
    video_len = args.video_len or args.end + 1
    for _ in range(args.draws):
        s = draw(seg, spec, rng)
        print(f"{s}: " + " ".join(map(str, sampling.clip_indices(s, spec, policy, video_len))))
    return EXIT_OK


def cmd_smooth(args) -> int:
    if args.method == "recursive":
        frames = baselines.read_softmax_csv(args.input)
        labels = baselines.recursive_average(frames, args.alpha)
    else:
        class_map = parse_mapping(args.mapping)
        stream = parse_labels(args.input, class_map)
        labels = baselines.modal_smooth(stream.labels, args.w)
    if args.mapping:
        names = parse_mapping(args.mapping).names
        sys.stdout.write("".join(names[y] + "\n" for y in labels))
    else:
        sys.stdout.write("".join(f"{y}\n" for y in labels))
    return EXIT_OK


def bench(frames: int, config: CleanerConfig, num_classes: int, seed: int) -> float:
    """Push a synthetic blip-corrupted stream through the engine; return frames/second."""
    rng = np.random.default_rng(seed)
    class_map = ClassMap.of_size(num_classes)
    model = simulate.GenModel.uniform(class_map, np.log(60.0), 0.5)
    gt = simulate.gen_ground_truth(model, frames, rng)
    raw = simulate.corrupt(gt, simulate.NoiseConfig(blip_rate=0.5, blip_len_max=4), rng).labels
    cleaner = Cleaner(config, class_map, keep_history=False)
    push = cleaner.push
    start = time.perf_counter()
    for y in raw:
        push(y)
    elapsed = time.perf_counter() - start
    return frames / elapsed if elapsed > 0 else float("inf")


def cmd_bench(args) -> int:
    class_map = ClassMap.of_size(args.classes)
    cfg = _config(args, class_map)
    fps = bench(args.frames, cfg, args.classes, args.seed)
    print(f"{args.frames} frames, {fps:,.0f} frames/s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="otalc", description="Online label cleaning, clip sampling and segmentation metrics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cleaner_flags(sp, default_cutoff=None):
        sp.add_argument("--cutoff", required=default_cutoff is None, default=default_cutoff,
                        help="static:<n> | class:<kappa>,<abs>:<stats.json> | class-log:...")
        sp.add_argument("--b", type=int, required=default_cutoff is None, default=2 if default_cutoff else None,
                        help="bridging width in frames")

    sp = sub.add_parser("clean", help="clean label names from stdin, write events to stdout")
    sp.add_argument("--mapping", required=True)
    cleaner_flags(sp)
    sp.add_argument("--finalize", choices=["discard", "confirm"], default="discard")
    sp.set_defaults(func=cmd_clean)

    sp = sub.add_parser("eval", help="score prediction files against ground truth")
    sp.add_argument("--gt-dir", required=True)
    sp.add_argument("--pred-dir", required=True)
    sp.add_argument("--mapping", required=True)
    sp.add_argument("--thresholds", default="0.1,0.25,0.5")
    sp.add_argument("--ignore", default="", help="comma-separated class names excluded from scoring")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("fit-stats", help="fit per-class log-normal segment lengths")
    sp.add_argument("--gt-dir", required=True)
    sp.add_argument("--mapping", required=True)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_fit_stats)

    sp = sub.add_parser("tune", help="grid search cleaner parameters")
    sp.add_argument("--gt-dir", required=True)
    sp.add_argument("--pred-dir", required=True)
    sp.add_argument("--mapping", required=True)
    sp.add_argument("--grid", required=True, help="JSON grid document")
    sp.add_argument("--stats", help="stats JSON for class-based grids")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_tune)

    sp = sub.add_parser("simulate", help="write synthetic gt/pred label files")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--classes", type=int, default=6)
    sp.add_argument("--frames", type=int, default=5000)
    sp.add_argument("--sequences", type=int, default=10)
    sp.add_argument("--mu-log", type=float, default=float(np.log(80.0)))
    sp.add_argument("--sigma-log", type=float, default=0.5)
    sp.add_argument("--blip-rate", type=float, default=0.5)
    sp.add_argument("--blip-len-max", type=int, default=4)
    sp.add_argument("--jitter", type=int, default=0)
    sp.add_argument("--sub-rate", type=float, default=0.0)
    sp.add_argument("--softmax", action="store_true", help="also write softmax CSVs")
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sample", help="print clip frame indices")
    sp.add_argument("--mode", choices=["dense", "surround", "inference"], required=True)
    sp.add_argument("--T", type=int, default=8)
    sp.add_argument("--tau", type=int, default=8)
    sp.add_argument("--start", type=int)
    sp.add_argument("--end", type=int)
    sp.add_argument("--t", type=int)
    sp.add_argument("--include-current", action="store_true")
    sp.add_argument("--video-len", type=int)
    sp.add_argument("--policy", choices=["clamp", "wrap"], default="clamp")
    sp.add_argument("--draws", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("smooth", help="run a smoothing baseline")
    sp.add_argument("--method", choices=["recursive", "modal"], required=True)
    sp.add_argument("--input", required=True, help="softmax CSV (recursive) or label file (modal)")
    sp.add_argument("--mapping")
    sp.add_argument("--alpha", type=float, default=0.9)
    sp.add_argument("--w", type=int, default=15)
    sp.set_defaults(func=cmd_smooth)

    sp = sub.add_parser("bench", help="measure cleaner throughput")
    sp.add_argument("--frames", type=int, default=1_000_000)
    sp.add_argument("--classes", type=int, default=8)
    cleaner_flags(sp, default_cutoff="static:9")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "smooth" and args.method == "modal" and not args.mapping:
            parser.error("--mapping is required for modal smoothing")
    except SystemExit as exc:  # --help exits 0, parse errors exit 1
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"otalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, ValueError) as exc:
        print(f"otalc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
