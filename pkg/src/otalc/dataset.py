"""Mapping files and per-sequence label files (one label name per line)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .core import ClassMap, LabelStream


class DataError(ValueError):
    """Malformed input data; ``line`` is 1-based when known."""

    def __init__(self, message: str, path=None, line: Optional[int] = None):
        where = ""
        if path is not None:
            where = f"{path}:"
            if line is not None:
                where += f"{line}:"
            where += " "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


def parse_mapping_text(text: str, path=None) -> ClassMap:
    ids: dict[int, int] = {}
    names: dict[str, int] = {}
    entries: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DataError(f"expected '<id> <name>', got {line!r}", path, lineno)
        try:
            cid = int(parts[0])
        except ValueError:
            raise DataError(f"class id {parts[0]!r} is not an integer", path, lineno) from None
        name = parts[1]
        if cid in ids:
            raise DataError(f"duplicate class id {cid} (first on line {ids[cid]})", path, lineno)
        if name in names:
            raise DataError(f"duplicate class name {name!r} (first on line {names[name]})", path, lineno)
        ids[cid] = lineno
        names[name] = lineno
        entries.append((cid, name))
    entries.sort()
    for expected, (cid, _) in enumerate(entries):
        if cid != expected:
            raise DataError(f"class ids are not dense from 0: missing {expected}", path, ids[cid])
    return ClassMap(tuple(name for _, name in entries))


def parse_mapping(path) -> ClassMap:
    return parse_mapping_text(Path(path).read_text(), path)


def parse_label_lines(lines: Iterable[str], class_map: ClassMap, path=None) -> LabelStream:
    lines = [ln.strip() for ln in lines]
    while lines and not lines[-1]:
        lines.pop()
    labels = []
    for lineno, name in enumerate(lines, 1):
        try:
            labels.append(class_map.index(name))
        except KeyError:
            raise DataError(f"unknown label {name!r}", path, lineno) from None
    return LabelStream(tuple(labels), class_map)


def parse_labels(path, class_map: ClassMap) -> LabelStream:
    return parse_label_lines(Path(path).read_text().splitlines(), class_map, path)


def write_labels(path, stream: LabelStream) -> None:
    Path(path).write_text("".join(name + "\n" for name in stream.names()))


def write_mapping(path, class_map: ClassMap) -> None:
    Path(path).write_text("".join(f"{i} {n}\n" for i, n in enumerate(class_map.names)))


@dataclass(frozen=True)
class DatasetLayout:
    gt_dir: Path
    pred_dir: Optional[Path]
    mapping_file: Path

    def sequences(self, source: str = "pred") -> list[str]:
        root = self.pred_dir if source == "pred" else self.gt_dir
        if root is None or not root.is_dir():
            raise DataError(f"not a directory: {root}")
        return sorted(p.name for p in root.iterdir() if p.is_file() and not p.name.startswith("."))

    def class_map(self) -> ClassMap:
        return parse_mapping(self.mapping_file)
