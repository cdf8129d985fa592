"""Session orchestration: the state machine tying speech, generation,
validation, and execution together.

Concurrency shape: one reactor. The session loop owns every phase
transition and all robot-state mutation (through the engine); the wake
listener and the wire service only put messages in the inbox. During
execution the loop alternates between draining the inbox and stepping the
engine one tick, which is what gives voice and wire interrupts their
one-tick latency bound.
"""

from __future__ import annotations

import logging
import queue
import threading
from dataclasses import dataclass
from typing import Callable

from .clock import Clock, VirtualClock
from .config import AppConfig
from .dsl import (
    CONTROL_STMTS,
    PauseIndefinitely,
    Program,
    Start,
    Stop,
    parse,
    pretty_print,
    report_from_parse_error,
    report_from_validation_error,
    validate,
)
from .errors import (
    BackendUnavailable,
    EmptyCompletion,
    NoCode,
    NotPaused,
    NotRunning,
    ProgramParseError,
    ProgramValidationError,
    StreamClosed,
    CaptureTimeout,
    UnrecognizedAudio,
)
from .events import ANNOUNCE, WARNING, EventEmitter, ExecutionEvent
from .llm import (
    EnvironmentDescription,
    ExchangeHistory,
    MockCompleter,
    PromptBuilder,
    RemoteCompleter,
    extract_code,
    load_prompt_template,
    load_rules,
)
from .sim import EXEC_PAUSED, EXEC_RUNNING, Engine, load_environment
from .speech import (
    InputStream,
    MockTranscriber,
    RemoteTranscriber,
    capture_utterance,
    detect_wake,
    load_corpus,
    make_wake_backend,
    normalize_text,
    transcribe,
)
from . import wire

logger = logging.getLogger(__name__)

# Fixed feedback cue texts. The beep is an audio artifact; on the event
# stream it is rendered as a bracketed token.
CUE_BEEP = "[beep]"
CUE_GOT_IT = "Got it, processing"
CUE_REJECTED = "Sorry, I can't do that"
CUE_ERROR = "Sorry, something went wrong"
CUE_BUSY = "Busy executing, say stop or pause"
CUE_NOTHING_RUNNING = "Nothing is running"

# Single-intent keywords that short-circuit the LLM during motion.
STOP_WORDS = frozenset({"stop"})
PAUSE_WORDS = frozenset({"pause", "wait"})
RESUME_WORDS = frozenset({"start", "resume", "continue", "go"})

PHASES = (
    "awaiting_wake",
    "capturing",
    "processing",
    "validating",
    "executing",
    "paused",
    "error",
)


def fast_path_match(text: str) -> str | None:
    """Map a transcript to an interrupt kind, or None for non-matches."""
    word = normalize_text(text)
    if word in STOP_WORDS:
        return "stop"
    if word in PAUSE_WORDS:
        return "pause"
    if word in RESUME_WORDS:
        return "resume"
    return None


# -- inbox messages ---------------------------------------------------------


@dataclass(frozen=True)
class WakeDetected:
    source: str


@dataclass(frozen=True)
class CaptureDone:
    pass


@dataclass(frozen=True)
class TranscriptArrived:
    text: str
    origin: str = "voice"  # voice | wire


@dataclass(frozen=True)
class CaptureFailed:
    reason: str


@dataclass(frozen=True)
class InterruptRequest:
    kind: str  # stop | pause | resume
    origin: str = "wire"


@dataclass(frozen=True)
class ConfigSet:
    key: str
    value: float


@dataclass(frozen=True)
class Shutdown:
    pass


Message = object


def wire_to_message(parsed: dict) -> Message:
    if parsed["type"] == "command":
        return TranscriptArrived(parsed["text"], origin="wire")
    if parsed["type"] == "interrupt":
        return InterruptRequest(parsed["kind"], origin="wire")
    if parsed["type"] == "config_set":
        return ConfigSet(parsed["key"], parsed["value"])
    raise ValueError(f"cannot route wire message {parsed['type']!r}")


class Session:
    """One user's command loop against one robot."""

    def __init__(
        self,
        config: AppConfig,
        clock: Clock,
        completer=None,
        emitter: EventEmitter | None = None,
    ) -> None:
        self.config = config
        self.clock = clock
        self.emitter = emitter or EventEmitter(clock)
        self.robot = load_environment(config)
        self.engine = Engine(self.robot, clock, self.emitter, config.engine)
        self.history = ExchangeHistory(config.llm.history_cap)
        self.env_desc = EnvironmentDescription.from_config(config)
        template = load_prompt_template(config.resolve(config.prompt_template))
        self.builder = PromptBuilder(template, self.env_desc, config)
        self.pause_delay_s = config.pause.inter_bite_delay_s
        if completer is not None:
            self.completer = completer
        elif config.llm.backend == "mock":
            self.completer = MockCompleter(
                load_rules(config.resolve(config.llm.rules)),
                self.env_desc,
                self.pause_delay_s,
            )
        else:
            self.completer = RemoteCompleter()
        self.phase = "awaiting_wake"
        self.last_report: dict | None = None
        self.inbox: queue.Queue[Message] = queue.Queue()
        self._sinks: list[Callable[[dict], None]] = []
        self._shutdown = False
        self._log_fh = None
        if config.event_log:
            self._log_fh = open(config.resolve(config.event_log), "a", encoding="utf-8")
        self.emitter.add_listener(self._on_event)

    # -- outbound fan-out ---------------------------------------------------

    def add_sink(self, fn: Callable[[dict], None]) -> None:
        """Register a consumer of outbound wire messages (already dicts)."""
        self._sinks.append(fn)

    def _broadcast(self, message: dict) -> None:
        for fn in list(self._sinks):
            try:
                fn(message)
            except Exception:
                logger.exception("wire sink failed")
        if self._log_fh is not None and message.get("type") == "event":
            self._log_fh.write(wire.encode(message) + "\n")
            self._log_fh.flush()

    def _on_event(self, event: ExecutionEvent) -> None:
        self._broadcast(wire.event_message(event.to_dict()))

    def snapshot_dict(self) -> dict:
        return wire.snapshot_message(
            phase=self.phase,
            robot=self.robot.to_dict(),
            history=[e.to_dict() for e in self.history.entries()],
            last_report=self.last_report,
            pause_delay_s=self.pause_delay_s,
            cheat_sheet=self.config.cheat_sheet,
        )

    def _set_phase(self, phase: str) -> None:
        if phase not in PHASES:
            raise ValueError(f"unknown phase {phase!r}")
        if phase != self.phase:
            self.phase = phase
            self._broadcast(self.snapshot_dict())

    # -- inbox --------------------------------------------------------------

    def enqueue(self, message: Message) -> None:
        self.inbox.put(message)

    def enqueue_wire(self, parsed: dict) -> None:
        """Convert a validated client wire message into an inbox message."""
        self.enqueue(wire_to_message(parsed))

    # -- message handling ---------------------------------------------------

    def handle_message(self, message: Message) -> None:
        if isinstance(message, Shutdown):
            self._shutdown = True
        elif isinstance(message, WakeDetected):
            if self.engine.active:
                # Wake during motion is fine; the transcript decides.
                return
            self.emitter.emit(ANNOUNCE, CUE_BEEP)
            self._set_phase("capturing")
        elif isinstance(message, CaptureDone):
            self.emitter.emit(ANNOUNCE, CUE_GOT_IT)
            self._set_phase("processing")
        elif isinstance(message, CaptureFailed):
            self.emitter.emit(WARNING, f"capture failed: {message.reason}")
            self._set_phase("awaiting_wake")
        elif isinstance(message, TranscriptArrived):
            self._on_transcript(message.text, message.origin)
        elif isinstance(message, InterruptRequest):
            self._apply_interrupt(message.kind, message.origin)
        elif isinstance(message, ConfigSet):
            self._apply_config(message.key, message.value)
        else:
            raise TypeError(f"unknown inbox message {message!r}")
        self._sync_exec_phase()

    def _on_transcript(self, text: str, origin: str) -> None:
        if not text.strip():
            self.emitter.emit(WARNING, "empty transcript")
            self._set_phase("awaiting_wake")
            return
        if self.engine.active:
            kind = fast_path_match(text)
            if kind is None:
                self.emitter.emit(ANNOUNCE, CUE_BUSY)
                return
            if kind == "resume" and self.robot.exec_status != EXEC_PAUSED:
                self.emitter.emit(ANNOUNCE, CUE_BUSY)
                return
            self._apply_interrupt(kind, origin="fast_path")
            return
        if origin == "wire":
            # A typed command plays the same cue cycle as a spoken one.
            self.emitter.emit(ANNOUNCE, CUE_BEEP)
            self.emitter.emit(ANNOUNCE, CUE_GOT_IT)
        self._process_command(text)

    def _process_command(self, text: str) -> None:
        self._set_phase("processing")
        try:
            prompt = self.builder.build(self.history.entries(), text, self.pause_delay_s)
            completion = self.completer.complete(prompt)
            code = extract_code(completion)
        except (EmptyCompletion, BackendUnavailable, NoCode) as exc:
            self.emitter.emit(WARNING, f"generation failed: {exc}")
            self.emitter.emit(ANNOUNCE, CUE_ERROR)
            self._broadcast(wire.error_message(str(exc)))
            self._set_phase("awaiting_wake")
            return

        self._set_phase("validating")
        try:
            program = parse(code)
        except ProgramParseError as exc:
            self._reject(text, code, report_from_parse_error(exc))
            return
        try:
            validated, report = validate(
                program,
                self.config.variables,
                min_delay_s=self.pause_delay_s,
                max_sleep_s=self.config.pause.max_sleep_s,
            )
        except ProgramValidationError as exc:
            self._reject(text, code, report_from_validation_error(exc))
            return

        pretty = pretty_print(validated)
        # snapshot carries the whole report message so reconnects can rebuild
        # the code pane, not just the clip list
        self.last_report = wire.report_message(text, pretty, report.to_dict(), accepted=True)
        self._broadcast(self.last_report)

        if len(validated.stmts) > 0 and all(
            isinstance(s, CONTROL_STMTS) for s in validated.stmts
        ):
            self.history.append(text, pretty)
            self._route_control(validated)
            self._sync_exec_phase()
            if not self.engine.active:
                self._set_phase("awaiting_wake")
            return

        self.history.append(text, pretty)
        self.engine.execute(validated)
        self._set_phase("executing")

    def _reject(self, command: str, code: str, report) -> None:
        self.last_report = wire.report_message(command, code, report.to_dict(), accepted=False)
        self._broadcast(self.last_report)
        reason = report.rejections[0].reason if report.rejections else "rejected"
        self.emitter.emit(WARNING, f"rejected: {reason}")
        self.emitter.emit(ANNOUNCE, CUE_REJECTED)
        self._set_phase("awaiting_wake")

    def _route_control(self, program: Program) -> None:
        """A generated program of only start/stop/pause acts on the current
        run instead of becoming a run of its own."""
        for stmt in program.stmts:
            if isinstance(stmt, Stop):
                self._apply_interrupt("stop", origin="program")
            elif isinstance(stmt, PauseIndefinitely):
                self._apply_interrupt("pause", origin="program")
            elif isinstance(stmt, Start):
                self._apply_interrupt("resume", origin="program")

    def _apply_interrupt(self, kind: str, origin: str) -> None:
        handle = self.engine.handle
        try:
            if handle is None:
                raise NotRunning("no program has run yet")
            if kind == "resume":
                handle.resume()
            else:
                handle.interrupt(kind)
        except (NotRunning, NotPaused) as exc:
            if origin == "wire":
                self._broadcast(wire.error_message(str(exc)))
            else:
                self.emitter.emit(ANNOUNCE, CUE_NOTHING_RUNNING)
            return
        # Apply at once; the engine drains controls before advancing time,
        # so the acknowledgement lands at the current simulated instant.
        self.step_engine()

    def _apply_config(self, key: str, value: float) -> None:
        if key != "pause_delay_s":
            self._broadcast(wire.error_message(f"unknown config key {key!r}"))
            return
        value = max(0.0, min(float(value), self.config.pause.max_sleep_s))
        self.pause_delay_s = value
        if hasattr(self.completer, "pause_delay_s"):
            self.completer.pause_delay_s = value
        self._broadcast(self.snapshot_dict())

    # -- engine driving -----------------------------------------------------

    def step_engine(self) -> bool:
        busy = self.engine.step()
        self._sync_exec_phase()
        return busy

    def _sync_exec_phase(self) -> None:
        if self.engine.active:
            status = self.robot.exec_status
            self._set_phase("paused" if status == EXEC_PAUSED else "executing")
        elif self.phase in ("executing", "paused"):
            self._set_phase("awaiting_wake")

    def engine_runnable(self) -> bool:
        """True when step_engine() would do real work right now."""
        if not self.engine.active:
            return False
        return self.robot.exec_status == EXEC_RUNNING or self.engine.pending_control()

    # -- loops --------------------------------------------------------------

    def serve_forever(self, idle_poll_ms: int = 200) -> None:
        """Live reactor loop on the session's clock (normally wall time)."""
        while not self._shutdown:
            if self.engine_runnable():
                try:
                    message = self.inbox.get_nowait()
                except queue.Empty:
                    self.step_engine()
                    continue
                self.handle_message(message)
            else:
                try:
                    message = self.inbox.get(timeout=idle_poll_ms / 1000.0)
                except queue.Empty:
                    continue
                self.handle_message(message)
        if self._log_fh is not None:
            self._log_fh.close()

    def shutdown(self) -> None:
        self.enqueue(Shutdown())


def run_script(session: Session, script: list[tuple[int, object]]) -> None:
    """Deterministic replay: deliver messages at scheduled virtual times.

    Each entry is (at_ms, message); a message is either an inbox dataclass
    or a client wire dict. Requires a VirtualClock. The engine runs to
    completion between and after deliveries, exactly as the live loop
    would, but with time fully under test control.
    """
    if not isinstance(session.clock, VirtualClock):
        raise ValueError("run_script needs a VirtualClock")
    for at_ms, message in sorted(script, key=lambda pair: pair[0]):
        while session.engine_runnable() and session.clock.now_ms() < at_ms:
            session.step_engine()
        if session.clock.now_ms() < at_ms:
            session.clock.advance_to(at_ms)
        if isinstance(message, dict):
            parsed = wire.parse_client_message(wire.encode(message))
            message = wire_to_message(parsed)
        session.handle_message(message)
    while session.engine_runnable():
        session.step_engine()


def listen(
    stream: InputStream,
    session: Session,
    wake_backend,
    transcriber,
    max_utterance_s: float,
    silence_cutoff_s: float,
    overflow: str,
) -> None:
    """Wake-listener thread body: wake -> capture -> transcribe -> inbox."""
    while True:
        try:
            wake = detect_wake(stream, wake_backend)
        except StreamClosed:
            return
        session.enqueue(WakeDetected(wake.source))
        try:
            utterance = capture_utterance(
                stream,
                max_utterance_s=max_utterance_s,
                silence_cutoff_s=silence_cutoff_s,
                overflow=overflow,
            )
        except CaptureTimeout as exc:
            session.enqueue(CaptureFailed(str(exc)))
            continue
        except StreamClosed:
            session.enqueue(CaptureFailed("input ended mid-capture"))
            return
        session.enqueue(CaptureDone())
        try:
            transcript = transcribe(utterance, transcriber)
        except (UnrecognizedAudio, BackendUnavailable) as exc:
            session.enqueue(CaptureFailed(str(exc)))
            continue
        session.enqueue(TranscriptArrived(transcript.text, origin="voice"))


def build_transcriber(config: AppConfig):
    if config.speech.transcriber == "mock":
        return MockTranscriber(load_corpus(config.resolve(config.speech.mock_corpus)))
    return RemoteTranscriber()


def start_listener(session: Session, stream: InputStream) -> threading.Thread:
    """Spawn the listener thread for a live session."""
    backend = make_wake_backend(
        session.config.speech.wake_backend, session.config.speech.wake_phrase
    )
    transcriber = build_transcriber(session.config)
    thread = threading.Thread(
        target=listen,
        args=(
            stream,
            session,
            backend,
            transcriber,
            session.config.speech.max_utterance_s,
            session.config.speech.silence_cutoff_s,
            session.config.speech.overflow,
        ),
        name="wake-listener",
        daemon=True,
    )
    thread.start()
    return thread
