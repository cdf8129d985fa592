"""Tick-based program executor over an injectable clock.

The engine owns all robot-state mutation. Other threads never touch state;
they enqueue control requests (pause/resume/stop) that the engine drains at
the top of every tick, which is what bounds interrupt latency to one tick.

Per-segment timing is a trapezoidal velocity profile with peak speed v and
ramp rate a over a path of nominal length L:

    t = L/v + v/a          when the peak is reached (L >= v^2/a)
    t = 2 * sqrt(L / a)    when the segment is ramp-dominated
"""

from __future__ import annotations

import math
import queue
import threading
from dataclasses import dataclass

from ..clock import Clock
from ..config import EngineConfig
from ..dsl import (
    MoveToMouth,
    PauseIndefinitely,
    Program,
    Scoop,
    ScrapeThenScoop,
    SetVar,
    Sleep,
    Start,
    Stop,
    format_number,
)
from ..errors import AlreadyRunning, NotPaused, NotRunning
from ..events import (
    ANNOUNCE,
    PAUSED,
    PROGRAM_DONE,
    RESUMED,
    SEGMENT_END,
    SEGMENT_START,
    SLEEP_END,
    SLEEP_START,
    STOPPED,
    VARIABLE_SET,
    WARNING,
    EventEmitter,
)
from .model import (
    EXEC_IDLE,
    EXEC_PAUSED,
    EXEC_RUNNING,
    EXEC_STOPPED,
    RobotState,
    TrajectorySegment,
    phase_at_bowl,
    phase_at_mouth,
    phase_moving,
    phase_scooping,
    phase_scraping,
)

READY_CUE = "Ready for another command"
SCOOPING_CUE = "Scooping now"
SCRAPING_CUE = "Scraping now"


def segment_duration_ms(length: float, speed: float, acceleration: float) -> int:
    if speed <= 0 or acceleration <= 0:
        raise ValueError("speed and acceleration must be positive")
    if length >= speed * speed / acceleration:
        t = length / speed + speed / acceleration
    else:
        t = 2.0 * math.sqrt(length / acceleration)
    return max(1, int(round(t * 1000.0)))


@dataclass
class _SegmentItem:
    segment: TrajectorySegment
    phase_during: str
    phase_after: str
    warn_empty_bowl: int | None = None


@dataclass
class _SleepItem:
    duration_ms: int


@dataclass
class _AnnounceItem:
    text: str


@dataclass
class _SetVarItem:
    name: str
    grounded: float


@dataclass
class _PauseItem:
    pass


@dataclass
class _StopItem:
    pass


class ExecutionHandle:
    """One program run: its work plan, progress, and interrupt surface."""

    def __init__(self, engine: Engine, program: Program, plan: list) -> None:
        self._engine = engine
        self.program = program
        self.plan = plan
        self.index = 0
        self.current = None
        self.remaining_ms = 0
        self.busy_ms = 0
        self.finished = False
        self.outcome: str | None = None  # "completed" | "stopped"
        self.events_from = len(engine.emitter.events)

    @property
    def status(self) -> str:
        return self._engine.state.exec_status

    def events(self) -> list:
        return self._engine.emitter.events[self.events_from:]

    def interrupt(self, kind: str) -> None:
        if kind not in ("stop", "pause"):
            raise ValueError(f"unknown interrupt kind {kind!r}")
        status = self.status
        if self.finished or status not in (EXEC_RUNNING, EXEC_PAUSED):
            raise NotRunning(f"cannot {kind}: program is not running")
        if kind == "pause" and status != EXEC_RUNNING:
            raise NotRunning("cannot pause: program is not running")
        self._engine.request(kind)

    def resume(self) -> None:
        if self.finished or self.status != EXEC_PAUSED:
            raise NotPaused("cannot resume: program is not paused")
        self._engine.request("resume")


class Engine:
    """Single-threaded stepper; drive it by calling step() in a loop."""

    def __init__(
        self,
        state: RobotState,
        clock: Clock,
        emitter: EventEmitter,
        config: EngineConfig | None = None,
    ) -> None:
        self.state = state
        self.clock = clock
        self.emitter = emitter
        self.config = config or EngineConfig()
        self.tick_ms = self.config.tick_ms
        self._controls: queue.Queue[str] = queue.Queue()
        self._faults: queue.Queue[str] = queue.Queue()
        self._handle: ExecutionHandle | None = None
        self._lock = threading.Lock()

    # -- plan construction ------------------------------------------------

    def _expand(self, program: Program) -> list:
        seg = self.config.segments
        plan: list = []
        for stmt in program.stmts:
            if isinstance(stmt, Scoop):
                plan.append(_AnnounceItem(SCOOPING_CUE))
                plan.append(
                    _SegmentItem(
                        TrajectorySegment("travel", seg.travel, f"bowl {stmt.bowl}"),
                        phase_moving("travel"),
                        phase_at_bowl(stmt.bowl),
                    )
                )
                plan.append(
                    _SegmentItem(
                        TrajectorySegment("scoop_dip", seg.scoop_dip, f"bowl {stmt.bowl}"),
                        phase_scooping(stmt.bowl),
                        phase_at_bowl(stmt.bowl),
                        warn_empty_bowl=stmt.bowl,
                    )
                )
            elif isinstance(stmt, ScrapeThenScoop):
                plan.append(_AnnounceItem(SCRAPING_CUE))
                plan.append(
                    _SegmentItem(
                        TrajectorySegment("travel", seg.travel, f"bowl {stmt.bowl}"),
                        phase_moving("travel"),
                        phase_at_bowl(stmt.bowl),
                    )
                )
                plan.append(
                    _SegmentItem(
                        TrajectorySegment("scrape_pass", seg.scrape_pass, f"bowl {stmt.bowl}"),
                        phase_scraping(stmt.bowl),
                        phase_at_bowl(stmt.bowl),
                    )
                )
                plan.append(
                    _SegmentItem(
                        TrajectorySegment("scoop_dip", seg.scoop_dip, f"bowl {stmt.bowl}"),
                        phase_scooping(stmt.bowl),
                        phase_at_bowl(stmt.bowl),
                        warn_empty_bowl=stmt.bowl,
                    )
                )
            elif isinstance(stmt, MoveToMouth):
                plan.append(
                    _SegmentItem(
                        TrajectorySegment("travel", seg.travel, "mouth"),
                        phase_moving("travel"),
                        phase_moving("present_at_mouth"),
                    )
                )
                plan.append(
                    _SegmentItem(
                        TrajectorySegment("present_at_mouth", seg.present_at_mouth, "mouth"),
                        phase_moving("present_at_mouth"),
                        phase_at_mouth(),
                    )
                )
            elif isinstance(stmt, Sleep):
                plan.append(_SleepItem(max(0, int(round(stmt.seconds * 1000.0)))))
            elif isinstance(stmt, SetVar):
                plan.append(_SetVarItem(stmt.var.value, stmt.value))
            elif isinstance(stmt, PauseIndefinitely):
                plan.append(_PauseItem())
            elif isinstance(stmt, Stop):
                plan.append(_StopItem())
            elif isinstance(stmt, Start):
                pass  # already running; begin/resume is a no-op mid-program
            else:
                raise TypeError(f"engine cannot execute {stmt!r}")
        return plan

    # -- public surface ----------------------------------------------------

    def execute(self, program: Program) -> ExecutionHandle:
        with self._lock:
            if self._handle is not None and not self._handle.finished:
                raise AlreadyRunning("a program is already executing")
            self.state.assert_natives_in_range()
            handle = ExecutionHandle(self, program, self._expand(program))
            self._handle = handle
            self.state.exec_status = EXEC_RUNNING
        return handle

    @property
    def handle(self) -> ExecutionHandle | None:
        return self._handle

    @property
    def active(self) -> bool:
        h = self._handle
        return h is not None and not h.finished

    def request(self, action: str) -> None:
        """Enqueue a control action; applied at the next tick boundary."""
        self._controls.put(action)

    def pending_control(self) -> bool:
        return not self._controls.empty() or not self._faults.empty()

    def inject_fault(self, kind: str) -> None:
        """Hardware fault injection; 'spoon_detach' forces a permanent stop."""
        if kind != "spoon_detach":
            raise ValueError(f"unknown fault {kind!r}")
        self._faults.put(kind)

    # -- stepping ----------------------------------------------------------

    def step(self) -> bool:
        """Advance at most one tick of simulated work.

        Returns True while a program is active (running or paused). Control
        and fault queues are drained before any time passes, so a request
        made between steps takes effect with zero additional simulated delay.
        """
        self._drain_faults()
        self._drain_controls()
        h = self._handle
        if h is None or h.finished:
            return False
        if self.state.exec_status == EXEC_PAUSED:
            return True
        if self.state.exec_status != EXEC_RUNNING:
            return False

        # Zero-duration items run back to back; they take no simulated time.
        while h.current is None:
            if h.index >= len(h.plan):
                self.emitter.emit(ANNOUNCE, READY_CUE)
                self.emitter.emit(PROGRAM_DONE, f"busy_ms={h.busy_ms}")
                h.finished = True
                h.outcome = "completed"
                self.state.exec_status = EXEC_IDLE
                return False
            item = h.plan[h.index]
            h.index += 1
            if isinstance(item, _AnnounceItem):
                self.emitter.emit(ANNOUNCE, item.text)
            elif isinstance(item, _SetVarItem):
                native = self.state.set_variable(item.name, item.grounded)
                self.emitter.emit(
                    VARIABLE_SET,
                    f"{item.name}={format_number(item.grounded)} native={native:.6g}",
                )
            elif isinstance(item, _PauseItem):
                self._apply_pause("program statement")
                return True
            elif isinstance(item, _StopItem):
                self._apply_stop("program statement")
                return False
            elif isinstance(item, _SleepItem):
                h.current = item
                h.remaining_ms = item.duration_ms
                self.emitter.emit(SLEEP_START, f"duration_ms={item.duration_ms}")
                if item.duration_ms == 0:
                    self.emitter.emit(SLEEP_END, "duration_ms=0")
                    h.current = None
            elif isinstance(item, _SegmentItem):
                duration = segment_duration_ms(
                    item.segment.nominal_length,
                    self.state.variables_native["speed"],
                    self.state.variables_native["acceleration"],
                )
                h.current = item
                h.remaining_ms = duration
                self.state.arm_phase = item.phase_during
                if item.warn_empty_bowl is not None and self.state.bowl_marked_empty(
                    item.warn_empty_bowl
                ):
                    self.emitter.emit(
                        WARNING, f"bowl {item.warn_empty_bowl} is marked empty"
                    )
                self.emitter.emit(
                    SEGMENT_START,
                    f"{item.segment.kind} target={item.segment.target} "
                    f"duration_ms={duration}",
                )
            else:
                raise TypeError(f"unknown plan item {item!r}")

        # One tick of the active timed item.
        chunk = min(self.tick_ms, h.remaining_ms)
        self.clock.sleep_ms(chunk)
        h.remaining_ms -= chunk
        h.busy_ms += chunk
        if h.remaining_ms == 0:
            item = h.current
            h.current = None
            if isinstance(item, _SleepItem):
                self.emitter.emit(SLEEP_END, f"duration_ms={item.duration_ms}")
            else:
                self.state.arm_phase = item.phase_after
                self.emitter.emit(
                    SEGMENT_END,
                    f"{item.segment.kind} target={item.segment.target}",
                )
        return True

    def run_to_completion(self, max_steps: int = 1_000_000) -> None:
        """Step until the program finishes; paused programs raise RuntimeError."""
        for _ in range(max_steps):
            if not self.step():
                return
            if self.state.exec_status == EXEC_PAUSED and self._controls.empty():
                raise RuntimeError("program paused with no pending resume")
        raise RuntimeError("program did not finish within max_steps")

    # -- control handling ---------------------------------------------------

    def _drain_faults(self) -> None:
        while True:
            try:
                self._faults.get_nowait()
            except queue.Empty:
                return
            if self.state.spoon_attached:
                self.state.spoon_attached = False
                self.emitter.emit(WARNING, "spoon detached")
            if self.active and self.state.exec_status in (EXEC_RUNNING, EXEC_PAUSED):
                self._apply_stop("spoon detached")

    def _drain_controls(self) -> None:
        while True:
            try:
                action = self._controls.get_nowait()
            except queue.Empty:
                return
            if not self.active:
                continue  # stale request; the program already ended
            status = self.state.exec_status
            if action == "pause" and status == EXEC_RUNNING:
                self._apply_pause("interrupt")
            elif action == "resume" and status == EXEC_PAUSED:
                self.state.exec_status = EXEC_RUNNING
                self.emitter.emit(RESUMED, "")
            elif action == "stop" and status in (EXEC_RUNNING, EXEC_PAUSED):
                self._apply_stop("interrupt")

    def _apply_pause(self, why: str) -> None:
        h = self._handle
        self.state.exec_status = EXEC_PAUSED
        progress = ""
        if h is not None and h.current is not None:
            progress = f" remaining_ms={h.remaining_ms}"
        self.emitter.emit(PAUSED, why + progress)

    def _apply_stop(self, why: str) -> None:
        h = self._handle
        self.state.exec_status = EXEC_STOPPED
        if h is not None:
            h.finished = True
            h.outcome = "stopped"
            h.current = None
        self.emitter.emit(STOPPED, why)
