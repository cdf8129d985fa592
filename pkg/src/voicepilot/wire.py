"""Wire protocol: canonical JSON message encoding and client-message parsing.

Every message is one JSON object with a ``type`` field. Serialization is
canonical (sorted keys, compact separators, floats rounded to 9 decimals) so
golden files can compare bytes. The schema is documented in
docs/wire-schema.json and frozen by tests on both ends of the wire.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import WireSchemaError

SERVER_TYPES = ("snapshot", "event", "report", "error")
CLIENT_TYPES = ("command", "interrupt", "config_set")
INTERRUPT_KINDS = ("stop", "pause", "resume")
CONFIG_KEYS = ("pause_delay_s",)


def _canonical(value: Any) -> Any:
    if isinstance(value, float):
        return round(value, 9)
    if isinstance(value, dict):
        return {k: _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    return value


def encode(message: dict) -> str:
    """Canonical single-line JSON for one wire message."""
    return json.dumps(
        _canonical(message), sort_keys=True, separators=(",", ":"), allow_nan=False
    )


def snapshot_message(
    phase: str,
    robot: dict,
    history: list[dict],
    last_report: dict | None,
    pause_delay_s: float,
    cheat_sheet: tuple[str, ...] | list[str],
) -> dict:
    return {
        "type": "snapshot",
        "phase": phase,
        "robot": robot,
        "history": history,
        "last_report": last_report,
        "pause_delay_s": pause_delay_s,
        "cheat_sheet": list(cheat_sheet),
    }


def event_message(event: dict) -> dict:
    return {"type": "event", "event": event}


def report_message(command: str, code: str | None, report: dict, accepted: bool) -> dict:
    return {
        "type": "report",
        "command": command,
        "code": code,
        "report": report,
        "accepted": accepted,
    }


def error_message(reason: str) -> dict:
    return {"type": "error", "reason": reason}


def command_message(text: str) -> dict:
    return {"type": "command", "text": text}


def interrupt_message(kind: str) -> dict:
    return {"type": "interrupt", "kind": kind}


def config_set_message(key: str, value: float) -> dict:
    return {"type": "config_set", "key": key, "value": value}


def parse_client_message(text: str | bytes) -> dict:
    """Validate one inbound client message; WireSchemaError carries the reason."""
    try:
        message = json.loads(text)
    except (ValueError, UnicodeDecodeError) as exc:
        raise WireSchemaError(f"schema: not valid JSON ({exc})") from exc
    if not isinstance(message, dict):
        raise WireSchemaError("schema: message must be an object")

    mtype = message.get("type")
    if mtype == "command":
        if not isinstance(message.get("text"), str) or not message["text"].strip():
            raise WireSchemaError("schema: command needs non-empty text")
        return {"type": "command", "text": message["text"]}
    if mtype == "interrupt":
        kind = message.get("kind")
        if kind not in INTERRUPT_KINDS:
            raise WireSchemaError(f"schema: interrupt kind must be one of {INTERRUPT_KINDS}")
        return {"type": "interrupt", "kind": kind}
    if mtype == "config_set":
        key = message.get("key")
        value = message.get("value")
        if key not in CONFIG_KEYS:
            raise WireSchemaError(f"schema: config key must be one of {CONFIG_KEYS}")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise WireSchemaError("schema: config value must be a number")
        return {"type": "config_set", "key": key, "value": float(value)}
    raise WireSchemaError(f"schema: unknown client message type {mtype!r}")
