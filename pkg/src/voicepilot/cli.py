"""Command-line entry points: run a live session, validate code, replay a script."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import threading
from pathlib import Path

from . import wire
from .clock import VirtualClock, WallClock
from .config import load_config
from .dsl import parse, pretty_print, report_from_parse_error, report_from_validation_error, validate
from .errors import ProgramParseError, ProgramValidationError, VoicePilotError
from .events import ANNOUNCE
from .service import WireService
from .session import Session, run_script, start_listener
from .speech import InputStream, TextInjection


def _mock_overrides(config):
    return dataclasses.replace(
        config,
        speech=dataclasses.replace(config.speech, transcriber="mock"),
        llm=dataclasses.replace(config.llm, backend="mock"),
    )


def _print_event(event) -> None:
    tag = "say" if event.kind == ANNOUNCE else event.kind
    print(f"[{event.t_ms:>7} ms] {tag:>13}  {event.detail}")


def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.mock:
        config = _mock_overrides(config)
    clock = VirtualClock() if args.virtual_clock else WallClock()
    session = Session(config, clock)
    session.emitter.add_listener(_print_event)

    static_dir = None
    if config.service.static_dir:
        static_dir = config.resolve(config.service.static_dir)
    port = args.port if args.port is not None else config.service.port
    service = WireService(session, port=port, static_dir=static_dir)
    service.start()
    print(f"wire service on ws://{service.host}:{service.port}/", file=sys.stderr)
    if static_dir:
        print(f"control panel at http://{service.host}:{service.port}/", file=sys.stderr)

    stream = InputStream()
    start_listener(session, stream)
    print(
        f'type commands ("{config.speech.wake_phrase} feed me a bite of bowl 1"); '
        "EOF or Ctrl-C exits",
        file=sys.stderr,
    )

    def stdin_reader() -> None:
        for line in sys.stdin:
            text = line.strip()
            if text:
                stream.push(TextInjection(text=text, t_ms=clock.now_ms()))
        stream.close()
        session.shutdown()

    threading.Thread(target=stdin_reader, name="stdin-reader", daemon=True).start()
    try:
        session.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        service.stop()
    return 0


def cmd_validate(args) -> int:
    config = load_config(args.config)
    code = Path(args.file).read_text(encoding="utf-8") if args.file != "-" else sys.stdin.read()
    try:
        program = parse(code)
    except ProgramParseError as exc:
        report = report_from_parse_error(exc)
        print(json.dumps(report.to_dict(), indent=2))
        return 1
    try:
        validated, report = validate(
            program,
            config.variables,
            min_delay_s=config.pause.inter_bite_delay_s,
            max_sleep_s=config.pause.max_sleep_s,
        )
    except ProgramValidationError as exc:
        report = report_from_validation_error(exc)
        print(json.dumps(report.to_dict(), indent=2))
        return 1
    print(json.dumps(report.to_dict(), indent=2))
    print(pretty_print(validated))
    return 0


def cmd_replay(args) -> int:
    config = _mock_overrides(load_config(args.config))
    script = []
    text = Path(args.transcript).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            entry = json.loads(line)
            script.append((int(entry["at_ms"]), entry["message"]))
        except (ValueError, KeyError, TypeError) as exc:
            print(f"{args.transcript}:{lineno}: bad script entry: {exc}", file=sys.stderr)
            return 2
    session = Session(config, VirtualClock())
    session.add_sink(lambda message: print(wire.encode(message)))
    run_script(session, script)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="voicepilot",
        description="Voice-driven command runtime for a simulated feeding robot.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a live session (text-injected voice input)")
    p_run.add_argument("--config", default=None, help="config file (default: packaged)")
    p_run.add_argument("--mock", action="store_true", help="force mock STT/LLM backends")
    p_run.add_argument("--port", type=int, default=None, help="wire service port")
    p_run.add_argument(
        "--virtual-clock",
        action="store_true",
        help="run simulated time as fast as possible",
    )
    p_run.set_defaults(fn=cmd_run)

    p_val = sub.add_parser("validate", help="parse and validate a code file, print the report")
    p_val.add_argument("file", help="code file, or - for stdin")
    p_val.add_argument("--config", default=None)
    p_val.set_defaults(fn=cmd_validate)

    p_rep = sub.add_parser("replay", help="replay a scripted session on a virtual clock")
    p_rep.add_argument("transcript", help="JSONL script: {at_ms, message} per line")
    p_rep.add_argument("--config", default=None)
    p_rep.set_defaults(fn=cmd_replay)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (VoicePilotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
