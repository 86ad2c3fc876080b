"""Online label cleaning: withhold a new label until its segment is long enough.

The streaming :class:`Cleaner` keeps O(C) bookkeeping per stream and emits
revision events: ``Append`` for the tidy label of the newest frame and
``Backdate`` when a newly confirmed segment overwrites frames that were
provisionally given the previous label.

A new label ``c`` is confirmed at frame ``t`` when

* its candidate span (runs of ``c`` merged across gaps shorter than ``b``
  frames) is at least ``cutoff(c)`` frames long, and
* the current unbroken run of ``c`` is at least ``b`` frames long.

Until then the tidy output repeats the last confirmed label. The first
frame of a stream is confirmed immediately.

:func:`reference_clean` recomputes the same output by scanning backwards
through the raw history at every frame; it is quadratic and exists to
check the engine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .core import ClassMap, LabelStream
from .cutoffs import CutoffPolicy, resolve_cutoff


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class CleanerConfig:
    policy: CutoffPolicy
    b: int

    def __post_init__(self):
        if self.b < 1:
            raise InvalidConfig(f"bridging width b must be >= 1, got {self.b}")
        self.check(self.policy.class_ids())

    def check(self, class_ids: Iterable[int]) -> None:
        """Raise :class:`InvalidConfig` unless ``b`` is below every class cutoff."""
        for c in class_ids:
            cut = resolve_cutoff(self.policy, c)
            if self.b >= cut:
                raise InvalidConfig(f"b={self.b} is not below the cutoff {cut} of class {c}")

    def cutoff(self, class_id: int) -> int:
        return resolve_cutoff(self.policy, class_id)


class Append(NamedTuple):
    frame: int
    label: int


class Backdate(NamedTuple):
    start: int
    end: int
    label: int


CleanEvent = Union[Append, Backdate]


class Finalize(enum.Enum):
    DISCARD = "discard"
    CONFIRM = "confirm"


@dataclass(frozen=True)
class Candidate:
    label: int
    start: int
    current_run: int
    full_length: int


_NEVER = -(1 << 62)


class Cleaner:
    """Stateful cleaner for a single stream.

    With ``keep_history=False`` no per-frame history is stored, so memory
    stays constant regardless of stream length; :meth:`tidy_snapshot` is
    then unavailable.
    """

    def __init__(self, config: CleanerConfig, class_map: ClassMap, *, keep_history: bool = True):
        config.check(range(len(class_map)))
        self.config = config
        self.class_map = class_map
        self.keep_history = keep_history
        n = len(class_map)
        self._cutoffs = [config.cutoff(c) for c in range(n)]
        self._b = config.b
        self._last_seen = [_NEVER] * n
        self._chain_start = [0] * n
        self._run_start = [0] * n
        self._t = 0
        self._confirmed: Optional[int] = None
        self._pending: Optional[int] = None  # most recent raw label differing from confirmed
        self.raw_history: list[int] = []
        self.tidy_history: list[int] = []

    @property
    def frames(self) -> int:
        return self._t

    @property
    def last_confirmed(self) -> Optional[int]:
        return self._confirmed

    @property
    def candidate(self) -> Optional[Candidate]:
        c = self._pending
        if c is None or c == self._confirmed:
            return None
        last = self._last_seen[c]
        if self._t - last > self._b:
            return None  # can no longer be bridged
        t = self._t - 1
        run = last - self._run_start[c] + 1 if last == t else 0
        return Candidate(c, self._chain_start[c], run, t - self._chain_start[c] + 1)

    def push(self, y: int) -> list[CleanEvent]:
        if not 0 <= y < len(self._cutoffs):
            raise ValueError(f"label {y} outside 0..{len(self._cutoffs) - 1}")
        t = self._t
        last = self._last_seen[y]
        if last != t - 1:
            if t - last > self._b:
                self._chain_start[y] = t
            self._run_start[y] = t
        self._last_seen[y] = t
        self._t = t + 1
        if self.keep_history:
            self.raw_history.append(y)

        if self._confirmed is None:
            self._confirmed = y
        elif y != self._confirmed:
            self._pending = y
            start = self._chain_start[y]
            if (t - start + 1 >= self._cutoffs[y]
                    and t - self._run_start[y] + 1 >= self._b):
                self._confirmed = y
                self._pending = None
                if self.keep_history:
                    self.tidy_history[start:t] = [y] * (t - start)
                    self.tidy_history.append(y)
                return [Backdate(start, t - 1, y), Append(t, y)]

        label = self._confirmed
        if self.keep_history:
            self.tidy_history.append(label)
        return [Append(t, label)]

    def tidy_snapshot(self) -> LabelStream:
        if not self.keep_history:
            raise RuntimeError("cleaner was created with keep_history=False")
        return LabelStream(tuple(self.tidy_history), self.class_map)

    def finalize(self, policy: Finalize = Finalize.DISCARD) -> list[CleanEvent]:
        """End-of-stream events. ``CONFIRM`` backdates a still-bridgeable trailing candidate."""
        policy = Finalize(policy)
        cand = self.candidate
        if policy is Finalize.DISCARD or cand is None:
            return []
        end = self._t - 1
        self._confirmed = cand.label
        self._pending = None
        if self.keep_history:
            self.tidy_history[cand.start:] = [cand.label] * (end - cand.start + 1)
        return [Backdate(cand.start, end, cand.label)]


def clean(raw: LabelStream, config: CleanerConfig, finalize: Finalize = Finalize.DISCARD) -> LabelStream:
    """Run the streaming engine over a whole stream and return the final tidy labels."""
    cleaner = Cleaner(config, raw.class_map)
    push = cleaner.push
    for y in raw.labels:
        push(y)
    cleaner.finalize(finalize)
    return cleaner.tidy_snapshot()


def apply_events(events: Iterable[CleanEvent], tidy: Optional[list[int]] = None) -> list[int]:
    """Replay an event sequence into a tidy label list (what a downstream consumer sees)."""
    tidy = [] if tidy is None else tidy
    for ev in events:
        if isinstance(ev, Backdate):
            tidy[ev.start:ev.end + 1] = [ev.label] * (ev.end - ev.start + 1)
        else:
            if ev.frame != len(tidy):
                raise ValueError(f"append for frame {ev.frame} but {len(tidy)} frames emitted")
            tidy.append(ev.label)
    return tidy


def _backward_scan(raw: Sequence[int], t: int, b: int) -> tuple[int, int, bool]:
    """Walk back from ``t`` over the run of ``raw[t]``, jumping gaps shorter than ``b``.

    Returns ``(start, run_length, reached_origin)`` where ``start`` is the
    first frame of the merged segment.
    """
    c = raw[t]
    i = t
    run_length = None
    while True:
        if i == 0:
            if run_length is None:
                run_length = t + 1
            return 0, run_length, True
        if raw[i] != raw[i - 1]:
            if run_length is None:
                run_length = t - i + 1
            lo = max(0, i - b)
            window = raw[lo:i]
            if c not in window:
                return i, run_length, False
            # land on the earliest recurrence inside the window
            i = lo + list(window).index(c)
            continue
        i -= 1


def reference_clean(raw: LabelStream, config: CleanerConfig, *, literal: bool = False) -> LabelStream:
    """Quadratic per-frame recomputation of the cleaned stream.

    ``literal=True`` follows the original published per-frame procedure
    verbatim: a new raw run first repeats the previous tidy label, reaching
    the stream start appends the first raw label, and an under-length
    segment emits the raw label preceding it (which may never have been
    confirmed). The default instead emits the last confirmed label, which
    is what :class:`Cleaner` does.
    """
    y = raw.labels
    b = config.b
    tidy: list[int] = []
    for t in range(len(y)):
        c = y[t]
        if t == 0:
            tidy.append(c)
            continue
        if literal:
            if c != y[t - 1]:
                tidy.append(tidy[t - 1])
                continue
        elif c == tidy[t - 1]:
            tidy.append(c)
            continue
        start, run_length, at_origin = _backward_scan(y, t, b)
        if literal and at_origin:
            tidy.append(y[0])
            continue
        if t - start + 1 >= config.cutoff(c) and run_length >= b:
            tidy[start:t] = [c] * (t - start)
            tidy.append(c)
        elif literal:
            tidy.append(y[start - 1])
        else:
            tidy.append(tidy[t - 1])
    return LabelStream(tuple(tidy), raw.class_map)


def format_event(ev: CleanEvent, class_map: ClassMap) -> str:
    """``A <t> <name>`` or ``B <from> <to> <name>``, newline-terminated."""
    if isinstance(ev, Backdate):
        return f"B {ev.start} {ev.end} {class_map.names[ev.label]}\n"
    return f"A {ev.frame} {class_map.names[ev.label]}\n"


def parse_event(line: str, class_map: ClassMap) -> CleanEvent:
    parts = line.split()
    if len(parts) == 3 and parts[0] == "A":
        return Append(int(parts[1]), class_map.index(parts[2]))
    if len(parts) == 4 and parts[0] == "B":
        return Backdate(int(parts[1]), int(parts[2]), class_map.index(parts[3]))
    raise ValueError(f"malformed event line {line!r}")
