"""Injectable clocks: wall time for live runs, virtual time for tests/replay.

All simulated time is integer milliseconds so event timestamps and golden
files stay bit-stable across platforms.
"""

from __future__ import annotations

import time
from typing import Protocol


class Clock(Protocol):
    def now_ms(self) -> int: ...

    def sleep_ms(self, ms: int) -> None: ...


class WallClock:
    """Monotonic real-time clock."""

    def __init__(self) -> None:
        self._t0 = time.monotonic_ns()

    def now_ms(self) -> int:
        return (time.monotonic_ns() - self._t0) // 1_000_000

    def sleep_ms(self, ms: int) -> None:
        if ms > 0:
            time.sleep(ms / 1000.0)


class VirtualClock:
    """Deterministic clock; sleeping advances time instantly."""

    def __init__(self, start_ms: int = 0) -> None:
        self._t = start_ms

    def now_ms(self) -> int:
        return self._t

    def sleep_ms(self, ms: int) -> None:
        if ms > 0:
            self._t += ms

    def advance_to(self, t_ms: int) -> None:
        if t_ms > self._t:
            self._t = t_ms
