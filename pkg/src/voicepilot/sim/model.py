"""Robot world model: symbolic arm state, bowls, variables in native units.

No kinematics. The arm phase is a label; what the simulation cares about is
timing, ordering, and the variable values motion is derived from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..config import AppConfig
from ..dsl import BOWL_COUNT, VariableSpec, scale_variable
from ..errors import ConfigError

EXEC_IDLE = "idle"
EXEC_RUNNING = "running"
EXEC_PAUSED = "paused"
EXEC_STOPPED = "stopped"

SEGMENT_KINDS = ("travel", "scoop_dip", "scrape_pass", "present_at_mouth", "retreat")


def phase_home() -> str:
    return "home"


def phase_at_bowl(k: int) -> str:
    return f"at_bowl({k})"


def phase_scooping(k: int) -> str:
    return f"scooping({k})"


def phase_scraping(k: int) -> str:
    return f"scraping({k})"


def phase_at_mouth() -> str:
    return "at_mouth"


def phase_moving(kind: str) -> str:
    return f"moving({kind})"


@dataclass(frozen=True)
class TrajectorySegment:
    kind: str
    nominal_length: float
    target: str  # "bowl k", "mouth", or "home"

    def __post_init__(self) -> None:
        if self.kind not in SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if self.nominal_length <= 0:
            raise ValueError("nominal_length must be > 0")


@dataclass
class RobotState:
    bowl_contents: tuple[str, ...]
    variable_specs: dict[str, VariableSpec]
    variables_grounded: dict[str, float] = field(default_factory=dict)
    variables_native: dict[str, float] = field(default_factory=dict)
    arm_phase: str = "home"
    spoon_attached: bool = True
    exec_status: str = EXEC_IDLE

    def set_variable(self, name: str, grounded: float) -> float:
        spec = self.variable_specs[name]
        native = scale_variable(grounded, spec)
        lo, hi = min(spec.native_lo, spec.native_hi), max(spec.native_lo, spec.native_hi)
        if not (lo - 1e-9 <= native <= hi + 1e-9):
            raise AssertionError(f"native {name}={native} outside [{lo}, {hi}]")
        self.variables_grounded[name] = grounded
        self.variables_native[name] = native
        return native

    def assert_natives_in_range(self) -> None:
        for name, spec in self.variable_specs.items():
            value = self.variables_native[name]
            lo, hi = min(spec.native_lo, spec.native_hi), max(spec.native_lo, spec.native_hi)
            if not (lo - 1e-9 <= value <= hi + 1e-9):
                raise AssertionError(f"native {name}={value} outside [{lo}, {hi}]")

    def bowl_marked_empty(self, k: int) -> bool:
        return self.bowl_contents[k].strip().lower() == "empty"

    def to_dict(self) -> dict:
        return {
            "arm_phase": self.arm_phase,
            "exec_status": self.exec_status,
            "spoon_attached": self.spoon_attached,
            "bowl_contents": list(self.bowl_contents),
            "variables_grounded": {k: self.variables_grounded[k] for k in sorted(self.variables_grounded)},
            "variables_native": {k: self.variables_native[k] for k in sorted(self.variables_native)},
        }


def load_environment(config: AppConfig) -> RobotState:
    """Fresh state: arm home, idle, spoon attached, variables at defaults."""
    if len(config.bowls) != BOWL_COUNT:
        raise ConfigError(f"environment must have exactly {BOWL_COUNT} bowls")
    state = RobotState(bowl_contents=config.bowls, variable_specs=dict(config.variables))
    for name, spec in config.variables.items():
        state.variables_grounded[name] = spec.default_grounded
        state.variables_native[name] = scale_variable(spec.default_grounded, spec)
    return state
