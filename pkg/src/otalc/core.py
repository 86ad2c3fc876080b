"""Label streams, class vocabularies and run-length segments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence


@dataclass(frozen=True)
class ClassMap:
    """Ordered class vocabulary; the position of a name is its class id."""

    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        seen = set()
        for idx, name in enumerate(self.names):
            if not name or any(ch.isspace() for ch in name):
                raise ValueError(f"class {idx}: invalid name {name!r}")
            if name in seen:
                raise ValueError(f"class {idx}: duplicate name {name!r}")
            seen.add(name)

    def __len__(self) -> int:
        return len(self.names)

    @property
    def size(self) -> int:
        return len(self.names)

    def name(self, class_id: int) -> str:
        return self.names[class_id]

    def index(self, name: str) -> int:
        try:
            return self._lookup[name]
        except KeyError:
            raise KeyError(f"unknown label {name!r}") from None

    @property
    def _lookup(self) -> dict[str, int]:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {n: i for i, n in enumerate(self.names)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    @classmethod
    def of_size(cls, n: int) -> "ClassMap":
        """Anonymous vocabulary ``c0 .. c{n-1}``."""
        return cls(tuple(f"c{i}" for i in range(n)))


@dataclass(frozen=True)
class LabelStream:
    """Per-frame class ids plus their vocabulary.

    Construction does not validate; use :func:`validate_stream` or
    :meth:`checked` when the labels come from outside.
    """

    labels: tuple[int, ...]
    class_map: ClassMap

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, idx):
        return self.labels[idx]

    @classmethod
    def checked(cls, labels: Iterable[int], class_map: ClassMap) -> "LabelStream":
        stream = cls(tuple(labels), class_map)
        diag = validate_stream(stream)
        if diag is not None:
            raise ValueError(str(diag))
        return stream

    def names(self) -> list[str]:
        return [self.class_map.names[x] for x in self.labels]


class Segment(NamedTuple):
    """Maximal run of one label; ``end`` is inclusive."""

    label: int
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class StreamDiagnostic:
    frame: int
    label: int
    message: str

    def __str__(self) -> str:
        return f"frame {self.frame}: {self.message}"


def rle_segments(stream: LabelStream | Sequence[int]) -> list[Segment]:
    labels = stream.labels if isinstance(stream, LabelStream) else stream
    segments: list[Segment] = []
    if len(labels) == 0:
        return segments
    start = 0
    current = labels[0]
    for i in range(1, len(labels)):
        if labels[i] != current:
            segments.append(Segment(int(current), start, i - 1))
            start = i
            current = labels[i]
    segments.append(Segment(int(current), start, len(labels) - 1))
    return segments


def labels_from_segments(segs: Sequence[Segment], class_map: ClassMap) -> LabelStream:
    """Expand segments back into a frame-level stream.

    Segments must tile ``[0, N-1]`` in order with no gaps or overlaps.
    """
    labels: list[int] = []
    expected = 0
    for k, seg in enumerate(segs):
        label, start, end = seg
        if start != expected:
            kind = "gap" if start > expected else "overlap"
            raise ValueError(f"segment {k}: {kind} at frame {expected} (starts at {start})")
        if end < start:
            raise ValueError(f"segment {k}: end {end} before start {start}")
        if not 0 <= label < len(class_map):
            raise ValueError(f"segment {k}: label {label} outside vocabulary of {len(class_map)}")
        labels.extend([label] * (end - start + 1))
        expected = end + 1
    return LabelStream(tuple(labels), class_map)


def validate_stream(stream: LabelStream) -> Optional[StreamDiagnostic]:
    """Return ``None`` when every label is a valid class id, else the first offender."""
    n_classes = len(stream.class_map)
    for frame, label in enumerate(stream.labels):
        if not 0 <= label < n_classes:
            return StreamDiagnostic(frame, label, f"label {label} outside 0..{n_classes - 1}")
    return None
