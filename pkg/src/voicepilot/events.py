"""Timestamped execution/announcement events and the emitter that orders them.

Zero-duration happenings (announcements, empty sleeps) can legitimately share
a timestamp, so total order is the pair (t_ms, seq): t_ms is non-decreasing
and seq strictly increases for the lifetime of an emitter.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

from .clock import Clock

# Event kinds carried on the wire.
ANNOUNCE = "announce"
SEGMENT_START = "segment_start"
SEGMENT_END = "segment_end"
SLEEP_START = "sleep_start"
SLEEP_END = "sleep_end"
PAUSED = "paused"
RESUMED = "resumed"
STOPPED = "stopped"
PROGRAM_DONE = "program_done"
WARNING = "warning"
VARIABLE_SET = "variable_set"

EVENT_KINDS = (
    ANNOUNCE,
    SEGMENT_START,
    SEGMENT_END,
    SLEEP_START,
    SLEEP_END,
    PAUSED,
    RESUMED,
    STOPPED,
    PROGRAM_DONE,
    WARNING,
    VARIABLE_SET,
)


@dataclass(frozen=True)
class ExecutionEvent:
    t_ms: int
    seq: int
    kind: str
    detail: str

    def to_dict(self) -> dict:
        return {
            "t_ms": self.t_ms,
            "seq": self.seq,
            "kind": self.kind,
            "detail": self.detail,
        }


class EventEmitter:
    """Clock-stamped, sequence-numbered event funnel.

    The engine and the session share one emitter per session, so their
    events interleave into a single ordered stream. Listeners are invoked
    on the emitting thread.
    """

    def __init__(self, clock: Clock) -> None:
        self._clock = clock
        self._seq = 0
        self._last_t = 0
        self._lock = threading.Lock()
        self.events: list[ExecutionEvent] = []
        self._listeners: list[Callable[[ExecutionEvent], None]] = []

    def add_listener(self, fn: Callable[[ExecutionEvent], None]) -> None:
        self._listeners.append(fn)

    def emit(self, kind: str, detail: str) -> ExecutionEvent:
        with self._lock:
            self._seq += 1
            t = max(self._clock.now_ms(), self._last_t)
            self._last_t = t
            event = ExecutionEvent(t_ms=t, seq=self._seq, kind=kind, detail=detail)
            self.events.append(event)
        for fn in self._listeners:
            fn(event)
        return event
