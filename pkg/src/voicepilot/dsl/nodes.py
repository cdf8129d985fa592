"""AST for the restricted robot command language.

The language is a straight-line sequence of eight statement forms; there is
deliberately no control flow, no expressions, and no user-defined names.
Everything the robot ever executes is a ``Program``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union


class RobotVar(str, Enum):
    """Adjustable robot variables, always manipulated on the grounded scale."""

    SPEED = "speed"
    ACCELERATION = "acceleration"
    SCOOP_DEPTH = "scoop_depth"


BOWL_COUNT = 4


@dataclass(frozen=True)
class Scoop:
    bowl: int


@dataclass(frozen=True)
class ScrapeThenScoop:
    bowl: int


@dataclass(frozen=True)
class MoveToMouth:
    pass


@dataclass(frozen=True)
class Start:
    pass


@dataclass(frozen=True)
class Stop:
    pass


@dataclass(frozen=True)
class PauseIndefinitely:
    pass


@dataclass(frozen=True)
class SetVar:
    var: RobotVar
    value: float


@dataclass(frozen=True)
class Sleep:
    seconds: float


Stmt = Union[
    Scoop,
    ScrapeThenScoop,
    MoveToMouth,
    Start,
    Stop,
    PauseIndefinitely,
    SetVar,
    Sleep,
]

# Statements that bring food toward the user; a mandatory pause must separate
# a mouth visit from the next one of these.
BITE_STMTS = (Scoop, ScrapeThenScoop)

# Statements routed to the execution-control channel rather than motion.
CONTROL_STMTS = (Start, Stop, PauseIndefinitely)


@dataclass(frozen=True)
class Program:
    stmts: tuple[Stmt, ...]

    def __len__(self) -> int:
        return len(self.stmts)


def format_number(value: float) -> str:
    """Canonical numeral: up to 3 decimal places, trailing zeros trimmed."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    text = f"{value:.3f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-") else "0"


def stmt_to_source(stmt: Stmt) -> str:
    if isinstance(stmt, Scoop):
        return f"obi.scoop_from_bowlno({stmt.bowl})"
    if isinstance(stmt, ScrapeThenScoop):
        return f"obi.scrape_then_scoop_bowlno({stmt.bowl})"
    if isinstance(stmt, MoveToMouth):
        return "obi.move_to_mouth()"
    if isinstance(stmt, Start):
        return "obi.start()"
    if isinstance(stmt, Stop):
        return "obi.stop()"
    if isinstance(stmt, PauseIndefinitely):
        return "obi.pause_indefinitely()"
    if isinstance(stmt, SetVar):
        return f"obi.{stmt.var.value} = {format_number(stmt.value)}"
    if isinstance(stmt, Sleep):
        return f"time.sleep({format_number(stmt.seconds)})"
    raise TypeError(f"not a statement: {stmt!r}")


def pretty_print(program: Program) -> str:
    """Canonical one-statement-per-line text.

    ``parse(pretty_print(p)) == p`` holds for any program whose numeric
    literals sit on the 3-decimal grid, which the validator guarantees.
    """
    return "\n".join(stmt_to_source(s) for s in program.stmts)
