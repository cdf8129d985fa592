"""Safety validation: bowl bounds, variable clipping, scaling, pause insertion.

Variables are manipulated by the language on a grounded scale (default 0-5)
and linearly mapped to the robot's native units only at execution time.
Out-of-range variable values and sleeps are clipped and recorded; an
out-of-range bowl index changes task semantics and is refused outright.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ProgramParseError, ProgramValidationError
from .nodes import (
    BITE_STMTS,
    BOWL_COUNT,
    MoveToMouth,
    Program,
    RobotVar,
    Scoop,
    ScrapeThenScoop,
    SetVar,
    Sleep,
    Stmt,
    format_number,
)

# All numeric literals are normalized to this grid so canonical text
# round-trips exactly (see nodes.format_number).
_DECIMALS = 3


@dataclass(frozen=True)
class VariableSpec:
    """Grounded and native ranges for one robot variable."""

    grounded_lo: float = 0.0
    grounded_hi: float = 5.0
    native_lo: float = 0.0
    native_hi: float = 1.0
    default_grounded: float = 2.5

    def __post_init__(self) -> None:
        if not self.grounded_lo < self.grounded_hi:
            raise ValueError("grounded_lo must be < grounded_hi")
        if not self.native_lo < self.native_hi:
            raise ValueError("native_lo must be < native_hi")
        if not self.grounded_lo <= self.default_grounded <= self.grounded_hi:
            raise ValueError("default_grounded outside grounded range")


@dataclass(frozen=True)
class Clip:
    stmt_index: int
    var: str
    raw_value: float
    clipped_value: float

    def to_dict(self) -> dict:
        return {
            "stmt_index": self.stmt_index,
            "var": self.var,
            "raw_value": self.raw_value,
            "clipped_value": self.clipped_value,
        }


@dataclass(frozen=True)
class Insertion:
    position: int
    seconds: float

    def to_dict(self) -> dict:
        return {"position": self.position, "seconds": self.seconds}


@dataclass(frozen=True)
class Rejection:
    line: int
    token: str
    reason: str

    def to_dict(self) -> dict:
        return {"line": self.line, "token": self.token, "reason": self.reason}


@dataclass
class SafetyReport:
    """Record of everything done to (or found wrong with) a candidate program."""

    clips: list[Clip] = field(default_factory=list)
    insertions: list[Insertion] = field(default_factory=list)
    rejections: list[Rejection] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.rejections

    def to_dict(self) -> dict:
        return {
            "clips": [c.to_dict() for c in self.clips],
            "insertions": [i.to_dict() for i in self.insertions],
            "rejections": [r.to_dict() for r in self.rejections],
        }


def report_from_parse_error(exc: ProgramParseError) -> SafetyReport:
    return SafetyReport(rejections=[Rejection(exc.line, exc.token, exc.reason)])


def report_from_validation_error(exc: ProgramValidationError) -> SafetyReport:
    return SafetyReport(
        rejections=[Rejection(exc.stmt_index + 1, f"statement {exc.stmt_index}", exc.reason)]
    )


def scale_variable(grounded: float, spec: VariableSpec) -> float:
    """Affine map from the grounded scale onto the variable's native range."""
    span = spec.grounded_hi - spec.grounded_lo
    frac = (grounded - spec.grounded_lo) / span
    return spec.native_lo + frac * (spec.native_hi - spec.native_lo)


def _round(value: float) -> float:
    return round(value, _DECIMALS)


def _clip(value: float, lo: float, hi: float) -> float:
    return min(max(value, lo), hi)


def enforce_inter_bite_pause(
    program: Program, min_delay_s: float
) -> tuple[Program, list[Insertion]]:
    """Guarantee cumulative sleep >= min_delay_s between each mouth visit
    and the next bite, inserting the deficit right after the mouth visit."""
    min_delay_s = _round(min_delay_s)
    out: list[Stmt] = list(program.stmts)
    insertions: list[Insertion] = []
    i = 0
    while i < len(out):
        if isinstance(out[i], MoveToMouth):
            j = None
            for k in range(i + 1, len(out)):
                if isinstance(out[k], BITE_STMTS):
                    j = k
                    break
            if j is not None:
                existing = sum(s.seconds for s in out[i + 1 : j] if isinstance(s, Sleep))
                if existing < min_delay_s - 1e-9:
                    deficit = _round(min_delay_s - existing)
                    out.insert(i + 1, Sleep(seconds=deficit))
                    insertions.append(Insertion(position=i + 1, seconds=deficit))
        i += 1
    return Program(stmts=tuple(out)), insertions


def validate(
    program: Program,
    variables: dict[str, VariableSpec],
    min_delay_s: float = 4.0,
    max_sleep_s: float = 60.0,
) -> tuple[Program, SafetyReport]:
    """Clip, bound-check, and pause-complete a parsed program.

    Returns the validated program plus the report of applied clips and
    insertions. Raises ProgramValidationError for unclippable violations
    (a bowl index outside 0..BOWL_COUNT-1).
    """
    report = SafetyReport()
    stmts: list[Stmt] = []

    for index, stmt in enumerate(program.stmts):
        if isinstance(stmt, (Scoop, ScrapeThenScoop)):
            if not 0 <= stmt.bowl < BOWL_COUNT:
                raise ProgramValidationError(
                    index, f"bowl index {stmt.bowl} outside 0..{BOWL_COUNT - 1}"
                )
            stmts.append(stmt)
        elif isinstance(stmt, SetVar):
            spec = variables[stmt.var.value]
            raw = stmt.value
            value = _round(_clip(raw, spec.grounded_lo, spec.grounded_hi))
            if abs(value - _round(raw)) > 1e-12:
                report.clips.append(
                    Clip(
                        stmt_index=index,
                        var=stmt.var.value,
                        raw_value=raw,
                        clipped_value=value,
                    )
                )
            stmts.append(SetVar(var=stmt.var, value=value))
        elif isinstance(stmt, Sleep):
            raw = stmt.seconds
            value = _round(_clip(raw, 0.0, max_sleep_s))
            if abs(value - _round(raw)) > 1e-12:
                report.clips.append(
                    Clip(
                        stmt_index=index,
                        var="sleep",
                        raw_value=raw,
                        clipped_value=value,
                    )
                )
            stmts.append(Sleep(seconds=value))
        else:
            stmts.append(stmt)

    validated, insertions = enforce_inter_bite_pause(Program(tuple(stmts)), min_delay_s)
    report.insertions = insertions
    return validated, report


def default_variable_specs() -> dict[str, VariableSpec]:
    """Shipped native ranges; configuration, not robot ground truth."""
    return {
        RobotVar.SPEED.value: VariableSpec(native_lo=0.2, native_hi=1.0),
        RobotVar.ACCELERATION.value: VariableSpec(native_lo=0.2, native_hi=1.0),
        RobotVar.SCOOP_DEPTH.value: VariableSpec(native_lo=10.0, native_hi=50.0),
    }


def describe_variable(name: str, spec: VariableSpec) -> str:
    """One prompt line for a variable: range and default on the grounded scale."""
    return (
        f"obi.{name}: {format_number(spec.grounded_lo)} to "
        f"{format_number(spec.grounded_hi)} (default {format_number(spec.default_grounded)})"
    )
