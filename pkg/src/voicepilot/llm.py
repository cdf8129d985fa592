"""LLM gateway: prompt assembly, conversation history, completion backends.

Completions are untrusted text. Nothing in this module evaluates or
interprets them beyond extracting a code block; safety lives in the parser
and validator downstream.
"""

from __future__ import annotations

import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import requests
import yaml

from .config import AppConfig
from .dsl import describe_variable, format_number
from .errors import BackendUnavailable, ConfigError, EmptyCompletion, NoCode

logger = logging.getLogger(__name__)

LLM_URL_ENV = "VP_LLM_URL"
LLM_TOKEN_ENV = "VP_LLM_TOKEN"
LLM_MODEL_ENV = "VP_LLM_MODEL"

REQUIRED_BLOCKS = (
    "environment",
    "functions",
    "variables",
    "user_control",
    "history_header",
    "exchange",
    "command_header",
)

_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)

# Repeated-bite requests are unrolled; cap the unroll so a mis-parsed count
# cannot produce an unbounded program.
MAX_REPEAT = 20


@dataclass(frozen=True)
class EnvironmentDescription:
    bowl_contents: tuple[str, ...]
    task_summary: str
    robot_physical_summary: str

    def __post_init__(self) -> None:
        if len(self.bowl_contents) != 4:
            raise ValueError("exactly 4 bowls required")

    @classmethod
    def from_config(cls, config: AppConfig) -> EnvironmentDescription:
        return cls(
            bowl_contents=config.bowls,
            task_summary=config.task_summary,
            robot_physical_summary=config.robot_summary,
        )


@dataclass(frozen=True)
class Exchange:
    user_command: str
    generated_code: str

    def to_dict(self) -> dict:
        return {"user_command": self.user_command, "generated_code": self.generated_code}


class ExchangeHistory:
    """Ordered (command, code) pairs with a size cap; reads get snapshots."""

    def __init__(self, cap: int = 20) -> None:
        if cap < 1:
            raise ValueError("cap must be >= 1")
        self.cap = cap
        self._entries: list[Exchange] = []
        self._lock = threading.Lock()

    def append(self, user_command: str, generated_code: str) -> None:
        with self._lock:
            self._entries.append(Exchange(user_command, generated_code))
            if len(self._entries) > self.cap:
                del self._entries[: len(self._entries) - self.cap]

    def entries(self) -> tuple[Exchange, ...]:
        with self._lock:
            return tuple(self._entries)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


@dataclass(frozen=True)
class RawCompletion:
    text: str
    backend_id: str
    latency_ms: int

    def __post_init__(self) -> None:
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be >= 0")


def load_prompt_template(path: str | Path) -> dict[str, str]:
    """Parse the block-structured template file; all blocks are mandatory."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read prompt template {path}: {exc}") from exc

    blocks: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in text.splitlines():
        header = re.fullmatch(r"\[([a-z_]+)\]", line.strip())
        if header:
            current = blocks.setdefault(header.group(1), [])
            continue
        if current is None:
            continue  # preamble comments
        current.append(line)

    missing = [b for b in REQUIRED_BLOCKS if b not in blocks]
    if missing:
        raise ConfigError(f"prompt template {path} missing blocks: {', '.join(missing)}")
    return {name: "\n".join(lines).strip("\n") for name, lines in blocks.items()}


class PromptBuilder:
    """Assembles the full prompt: environment, functions, variables, user
    control, conversation history, then the new command as the final line."""

    def __init__(self, template: dict[str, str], env: EnvironmentDescription, config: AppConfig):
        self.template = template
        self.env = env
        self.config = config
        # Fail at startup, not on first command, if placeholders are broken.
        self.build([], "startup probe", config.pause.inter_bite_delay_s)

    def build(self, history, command_text: str, pause_delay_s: float) -> str:
        if not command_text.strip():
            raise ValueError("command text must be non-empty")
        bowl_lines = "\n".join(
            f"- Bowl {i}: {content}" for i, content in enumerate(self.env.bowl_contents)
        )
        variable_lines = "\n".join(
            describe_variable(name, spec) for name, spec in self.config.variables.items()
        )
        try:
            parts = [
                self.template["environment"].format(
                    robot_summary=self.env.robot_physical_summary,
                    task_summary=self.env.task_summary,
                    bowl_lines=bowl_lines,
                ),
                self.template["functions"].format(pause_delay=format_number(pause_delay_s)),
                self.template["variables"].format(variable_lines=variable_lines),
                self.template["user_control"],
            ]
            if len(history) > 0:
                parts.append(self.template["history_header"])
                for entry in history:
                    parts.append(
                        self.template["exchange"].format(
                            user_command=entry.user_command,
                            generated_code=entry.generated_code,
                        )
                    )
            parts.append(self.template["command_header"])
        except (KeyError, IndexError) as exc:
            raise ConfigError(f"prompt template placeholder error: {exc}") from exc
        return "\n\n".join(parts) + "\n" + command_text


@dataclass(frozen=True)
class CompletionRule:
    name: str
    pattern: re.Pattern
    code: str | None = None
    repeat_count_group: str | None = None
    repeat_body: str | None = None
    repeat_separator: str | None = None


def load_rules(path: str | Path) -> list[CompletionRule]:
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot load completion rules {path}: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("rules"), list):
        raise ConfigError(f"rule file {path} must contain a 'rules' list")

    rules = []
    for entry in raw["rules"]:
        name = entry.get("name", "?")
        try:
            pattern = re.compile(entry["pattern"])
        except (KeyError, re.error) as exc:
            raise ConfigError(f"rule {name!r}: bad pattern: {exc}") from exc
        code = entry.get("code")
        repeat = entry.get("repeat")
        if (code is None) == (repeat is None):
            raise ConfigError(f"rule {name!r}: exactly one of code/repeat required")
        if repeat is not None:
            rules.append(
                CompletionRule(
                    name=name,
                    pattern=pattern,
                    repeat_count_group=str(repeat["count_group"]),
                    repeat_body=str(repeat["body"]),
                    repeat_separator=str(repeat.get("separator", "")),
                )
            )
        else:
            rules.append(CompletionRule(name=name, pattern=pattern, code=str(code)))
    return rules


class MockCompleter:
    """Deterministic rule-table backend; the fixture for every offline test.

    Matches the new command (the prompt's final line) against the rules in
    order. Also counts invocations so tests can assert the fast path never
    reaches it.
    """

    backend_id = "mock"

    def __init__(
        self,
        rules: list[CompletionRule],
        env: EnvironmentDescription,
        pause_delay_s: float = 4.0,
    ) -> None:
        self.rules = rules
        self.env = env
        self.pause_delay_s = pause_delay_s
        self.calls = 0
        self.prompts: list[str] = []

    def _substitutions(self, match: re.Match) -> dict[str, str]:
        subs = {k: v for k, v in match.groupdict().items() if v is not None}
        subs["pause_delay"] = format_number(self.pause_delay_s)
        if "var" in subs:
            subs["var_attr"] = subs["var"].lower().replace(" ", "_")
        if "food" in subs:
            food = subs["food"].lower()
            for i, content in enumerate(self.env.bowl_contents):
                if food and food in content.lower():
                    subs["food_bowl"] = str(i)
                    break
        return subs

    def complete(self, prompt: str) -> RawCompletion:
        self.calls += 1
        self.prompts.append(prompt)
        command = prompt.rstrip("\n").rsplit("\n", 1)[-1]
        for rule in self.rules:
            match = rule.pattern.search(command)
            if match is None:
                continue
            subs = self._substitutions(match)
            try:
                if rule.code is not None:
                    text = rule.code.format(**subs)
                else:
                    count = max(1, min(int(subs[rule.repeat_count_group]), MAX_REPEAT))
                    body = rule.repeat_body.format(**subs)
                    separator = rule.repeat_separator.format(**subs)
                    joiner = f"\n{separator}\n" if separator else "\n"
                    text = joiner.join([body] * count)
            except (KeyError, IndexError, ValueError):
                # e.g. food not present in any bowl
                raise EmptyCompletion(f"rule {rule.name!r} could not be instantiated")
            return RawCompletion(text=text, backend_id=self.backend_id, latency_ms=0)
        raise EmptyCompletion(f"no completion rule matched {command!r}")


class RemoteCompleter:
    """Chat-completion HTTP backend configured through environment variables."""

    backend_id = "remote"

    def __init__(
        self,
        url: str | None = None,
        token: str | None = None,
        model: str | None = None,
        timeout_s: float = 60.0,
        session: requests.Session | None = None,
    ) -> None:
        self.url = url or os.environ.get(LLM_URL_ENV, "")
        self.token = token if token is not None else os.environ.get(LLM_TOKEN_ENV, "")
        self.model = model or os.environ.get(LLM_MODEL_ENV, "")
        if not self.url:
            raise ConfigError(f"remote completer needs {LLM_URL_ENV}")
        self.timeout_s = timeout_s
        self._session = session or requests.Session()
        self.calls = 0

    def complete(self, prompt: str) -> RawCompletion:
        self.calls += 1
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        started = time.monotonic()
        try:
            resp = self._session.post(
                self.url, json=body, headers=headers, timeout=self.timeout_s
            )
            resp.raise_for_status()
            payload = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise BackendUnavailable(f"completion endpoint failed: {exc}") from exc
        latency_ms = int((time.monotonic() - started) * 1000)
        try:
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(f"unexpected completion payload: {exc}") from exc
        if not str(text).strip():
            raise EmptyCompletion("remote backend returned empty text")
        return RawCompletion(text=str(text), backend_id=self.backend_id, latency_ms=latency_ms)


def extract_code(completion: RawCompletion | str) -> str:
    """First fenced block if any fence exists, else the whole text trimmed."""
    text = completion.text if isinstance(completion, RawCompletion) else completion
    match = _FENCE_RE.search(text)
    result = (match.group(1) if match else text).strip()
    if not result:
        raise NoCode("completion contained no code")
    return result
