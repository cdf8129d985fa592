"""Configuration schema and loader.

A single human-readable YAML file (versioned) describes the environment,
variable ranges, pause policy, engine timing, backend selection, and the
paths of the prompt template / mock tables. ``load_config(None)`` loads the
packaged defaults, which are also the reference desk setup.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .dsl import BOWL_COUNT, VariableSpec
from .errors import ConfigError

CONFIG_VERSION = 1

_WAKE_BACKENDS = ("keyword", "push_to_talk", "always_on")
_OVERFLOW_MODES = ("truncate", "timeout")
_BACKENDS = ("mock", "remote")


def _data_dir() -> Path:
    return Path(str(importlib.resources.files("voicepilot").joinpath("data")))


@dataclass(frozen=True)
class PauseConfig:
    inter_bite_delay_s: float = 4.0
    max_sleep_s: float = 60.0

    def __post_init__(self) -> None:
        if self.inter_bite_delay_s < 0:
            raise ConfigError("inter_bite_delay_s must be >= 0")
        if self.max_sleep_s < self.inter_bite_delay_s:
            raise ConfigError("max_sleep_s must cover the inter-bite delay")


@dataclass(frozen=True)
class SegmentLengths:
    """Nominal path lengths (normalized units) of the predefined trajectories."""

    travel: float = 1.0
    scoop_dip: float = 0.3
    scrape_pass: float = 0.5
    present_at_mouth: float = 0.2

    def __post_init__(self) -> None:
        for name in ("travel", "scoop_dip", "scrape_pass", "present_at_mouth"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"segment length {name} must be > 0")


@dataclass(frozen=True)
class EngineConfig:
    tick_ms: int = 50
    segments: SegmentLengths = field(default_factory=SegmentLengths)

    def __post_init__(self) -> None:
        if self.tick_ms <= 0:
            raise ConfigError("tick_ms must be > 0")


@dataclass(frozen=True)
class SpeechConfig:
    wake_backend: str = "keyword"
    wake_phrase: str = "hey obi"
    max_utterance_s: float = 15.0
    silence_cutoff_s: float = 1.5
    overflow: str = "truncate"
    transcriber: str = "mock"
    mock_corpus: str = "stt_corpus.json"

    def __post_init__(self) -> None:
        if self.wake_backend not in _WAKE_BACKENDS:
            raise ConfigError(f"unknown wake backend {self.wake_backend!r}")
        if self.overflow not in _OVERFLOW_MODES:
            raise ConfigError(f"unknown overflow mode {self.overflow!r}")
        if self.transcriber not in _BACKENDS:
            raise ConfigError(f"unknown transcriber {self.transcriber!r}")
        if self.max_utterance_s <= 0 or self.silence_cutoff_s <= 0:
            raise ConfigError("utterance windows must be positive")


@dataclass(frozen=True)
class LlmConfig:
    backend: str = "mock"
    rules: str = "llm_rules.yaml"
    history_cap: int = 20

    def __post_init__(self) -> None:
        if self.backend not in _BACKENDS:
            raise ConfigError(f"unknown llm backend {self.backend!r}")
        if self.history_cap < 1:
            raise ConfigError("history_cap must be >= 1")


@dataclass(frozen=True)
class ServiceConfig:
    port: int = 8765
    static_dir: str | None = None


@dataclass(frozen=True)
class AppConfig:
    bowls: tuple[str, ...]
    task_summary: str
    robot_summary: str
    variables: dict[str, VariableSpec]
    pause: PauseConfig
    engine: EngineConfig
    speech: SpeechConfig
    llm: LlmConfig
    service: ServiceConfig
    prompt_template: str
    cheat_sheet: tuple[str, ...]
    event_log: str | None
    config_dir: Path

    def resolve(self, name: str) -> Path:
        """Resolve a config-relative file reference."""
        p = Path(name)
        return p if p.is_absolute() else self.config_dir / p


def _variable_specs(raw: dict) -> dict[str, VariableSpec]:
    specs: dict[str, VariableSpec] = {}
    for name in ("speed", "acceleration", "scoop_depth"):
        entry = raw.get(name)
        if entry is None:
            raise ConfigError(f"missing variable spec for {name!r}")
        try:
            specs[name] = VariableSpec(
                grounded_lo=float(entry.get("grounded_lo", 0.0)),
                grounded_hi=float(entry.get("grounded_hi", 5.0)),
                native_lo=float(entry["native_lo"]),
                native_hi=float(entry["native_hi"]),
                default_grounded=float(entry.get("default_grounded", 2.5)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad variable spec for {name!r}: {exc}") from exc
    return specs


def load_config(path: str | Path | None = None) -> AppConfig:
    """Load and validate a config file; None loads the packaged default."""
    if path is None:
        path = _data_dir() / "default.yaml"
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")

    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")

    version = raw.get("config_version")
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config_version {version!r} (expected {CONFIG_VERSION})")

    bowls = raw.get("bowls")
    if not isinstance(bowls, list) or len(bowls) != BOWL_COUNT:
        raise ConfigError(f"config must list exactly {BOWL_COUNT} bowls")

    try:
        pause = PauseConfig(**(raw.get("pause") or {}))
        engine_raw = dict(raw.get("engine") or {})
        segments = SegmentLengths(**(engine_raw.pop("segments", None) or {}))
        engine = EngineConfig(segments=segments, **engine_raw)
        speech = SpeechConfig(**(raw.get("speech") or {}))
        llm = LlmConfig(**(raw.get("llm") or {}))
        service = ServiceConfig(**(raw.get("service") or {}))
    except TypeError as exc:
        raise ConfigError(f"unknown config key: {exc}") from exc

    return AppConfig(
        bowls=tuple(str(b) for b in bowls),
        task_summary=str(raw.get("task_summary", "Feed the user from the bowls.")),
        robot_summary=str(
            raw.get(
                "robot_summary",
                "A 6 degree-of-freedom tabletop arm over a base of 4 food bowls, "
                "with a detachable spoon at the end.",
            )
        ),
        variables=_variable_specs(raw.get("variables") or {}),
        pause=pause,
        engine=engine,
        speech=speech,
        llm=llm,
        service=service,
        prompt_template=str(raw.get("prompt_template", "prompt_template.txt")),
        cheat_sheet=tuple(str(s) for s in raw.get("cheat_sheet", [])),
        event_log=raw.get("event_log"),
        config_dir=path.parent.resolve(),
    )
