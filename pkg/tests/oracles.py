"""Independent oracles and generators shared across the test suite.

Everything here is deliberately implemented without reusing the package's
parser/validator logic, so agreement between the two is evidence rather
than tautology.
"""

from __future__ import annotations

import random
import re

from voicepilot.dsl import (
    MoveToMouth,
    PauseIndefinitely,
    Program,
    RobotVar,
    Scoop,
    ScrapeThenScoop,
    SetVar,
    Sleep,
    Start,
    Stop,
)

# Strict per-line grammar of the command language, used to check that
# anything the parser accepts pretty-prints back onto the whitelist.
_NUM = r"[+-]?(?:\d+(?:\.\d+)?|\.\d+)"
WHITELIST_LINE_RES = [
    re.compile(p)
    for p in (
        rf"^obi\.scoop_from_bowlno\(\s*[+-]?\d+\s*\)$",
        rf"^obi\.scrape_then_scoop_bowlno\(\s*[+-]?\d+\s*\)$",
        r"^obi\.move_to_mouth\(\s*\)$",
        r"^obi\.start\(\s*\)$",
        r"^obi\.stop\(\s*\)$",
        r"^obi\.pause_indefinitely\(\s*\)$",
        rf"^obi\.(?:speed|acceleration|scoop_depth)\s*=\s*{_NUM}$",
        rf"^(?:time\.)?sleep\(\s*{_NUM}\s*\)$",
    )
]


def line_on_whitelist(line: str) -> bool:
    stripped = line.strip()
    return any(p.match(stripped) for p in WHITELIST_LINE_RES)


def grid_value(rng: random.Random, lo: float, hi: float) -> float:
    """Random value on the canonical 3-decimal grid (round-trip safe)."""
    return round(rng.uniform(lo, hi), 3)


def random_stmt(rng: random.Random, include_control: bool = True):
    choices = ["scoop", "scrape", "mouth", "setvar", "sleep"]
    if include_control:
        choices += ["start", "stop", "pause"]
    kind = rng.choice(choices)
    if kind == "scoop":
        return Scoop(bowl=rng.randrange(4))
    if kind == "scrape":
        return ScrapeThenScoop(bowl=rng.randrange(4))
    if kind == "mouth":
        return MoveToMouth()
    if kind == "setvar":
        var = rng.choice(list(RobotVar))
        return SetVar(var=var, value=grid_value(rng, 0.0, 5.0))
    if kind == "sleep":
        return Sleep(seconds=grid_value(rng, 0.0, 10.0))
    if kind == "start":
        return Start()
    if kind == "stop":
        return Stop()
    return PauseIndefinitely()


def random_program(
    rng: random.Random,
    max_len: int = 12,
    include_control: bool = True,
) -> Program:
    n = rng.randrange(0, max_len + 1)
    return Program(tuple(random_stmt(rng, include_control) for _ in range(n)))


def random_bite_program(rng: random.Random, bites: int | None = None) -> Program:
    """Multi-bite shaped programs: bites, mouth visits, stray sleeps/setvars."""
    bites = bites if bites is not None else rng.randrange(2, 6)
    stmts = []
    for _ in range(bites):
        if rng.random() < 0.2:
            stmts.append(SetVar(var=rng.choice(list(RobotVar)), value=grid_value(rng, 0, 5)))
        stmts.append(
            Scoop(bowl=rng.randrange(4))
            if rng.random() < 0.7
            else ScrapeThenScoop(bowl=rng.randrange(4))
        )
        stmts.append(MoveToMouth())
        if rng.random() < 0.5:
            stmts.append(Sleep(seconds=grid_value(rng, 0.0, 8.0)))
        if rng.random() < 0.15:
            stmts.append(Sleep(seconds=grid_value(rng, 0.0, 3.0)))
    return Program(tuple(stmts))


def pause_gaps(program: Program) -> list[tuple[int, int, float]]:
    """Linear scan: (mouth_index, next_bite_index, cumulative_sleep) triples."""
    gaps = []
    stmts = program.stmts
    for i, stmt in enumerate(stmts):
        if not isinstance(stmt, MoveToMouth):
            continue
        total = 0.0
        for j in range(i + 1, len(stmts)):
            nxt = stmts[j]
            if isinstance(nxt, (Scoop, ScrapeThenScoop)):
                gaps.append((i, j, total))
                break
            if isinstance(nxt, Sleep):
                total += nxt.seconds
    return gaps


def pause_satisfied(program: Program, min_delay_s: float, tol: float = 1e-9) -> bool:
    return all(total >= min_delay_s - tol for _, _, total in pause_gaps(program))


def trapezoid_seconds(length: float, v: float, a: float) -> float:
    """Independent restatement of the segment timing model."""
    if length >= v * v / a:
        return length / v + v / a
    return 2.0 * (length / a) ** 0.5


# -- fuzz corpus --------------------------------------------------------------

_JUNK_TOKENS = [
    "import os", "os.system('rm -rf /')", "exec(code)", "eval(x)",
    "while True:", "for i in range(3):", "if x:", "def f():", "lambda: 1",
    "obi.scoop_from_bowlno", "obi.launch_missiles()", "obi.speed == 3",
    "obi.speed += 1", "obi.speed: float = 1", "print('hi')", "x = 1",
    "obi.scoop_from_bowlno(1); obi.stop()", "obi.scoop_from_bowlno(x)",
    "obi.scoop_from_bowlno(1, 2)", "obi.move_to_mouth(1)", "time.sleep(-'a')",
    "sleep()", "time.sleep(1, 2)", "obi.sleep(1)", "obi.speed = [1]",
    "obi.speed = speed", "obi.speed = 1 + 2", "getattr(obi, 'stop')()",
    "__import__('os')", "obi.stop() or obi.start()", "assert False",
    "return 1", "yield 2", "raise ValueError", "del obi", "global obi",
    "obi . scoop_from_bowlno ( 1 )", "OBI.stop()", "obi.Stop()",
    "time .sleep(1)", "obj.stop()", "obi.scoop_from_bowlno(True)",
    "obi.speed = True", "obi.speed = 1j", "time.sleep(float('nan'))",
]

_ALPHABET = "abcdefghijklmnopqrstuvwxyz_.()= 0123456789\n#'\"+-*/:[]{},"


def random_code_text(rng: random.Random) -> str:
    """Random fuzz text: pure noise, junk lines, or a mutated valid program."""
    roll = rng.random()
    if roll < 0.25:
        n = rng.randrange(1, 120)
        return "".join(rng.choice(_ALPHABET) for _ in range(n))
    if roll < 0.5:
        lines = [rng.choice(_JUNK_TOKENS) for _ in range(rng.randrange(1, 5))]
        return "\n".join(lines)

    from voicepilot.dsl import pretty_print

    base = pretty_print(random_program(rng, max_len=6))
    if roll < 0.65 or not base:
        return base
    # Mutate: splice junk in, corrupt characters, or duplicate fragments.
    mutation = rng.random()
    if mutation < 0.4:
        lines = base.splitlines()
        lines.insert(rng.randrange(0, len(lines) + 1), rng.choice(_JUNK_TOKENS))
        return "\n".join(lines)
    if mutation < 0.7:
        pos = rng.randrange(0, len(base))
        return base[:pos] + rng.choice(_ALPHABET) + base[pos + 1 :]
    pos = rng.randrange(0, len(base))
    return base[:pos] + rng.choice(_JUNK_TOKENS) + base[pos:]
