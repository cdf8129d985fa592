"""Whitelist parser for candidate code text.

Candidate completions are treated as untrusted text. The parser recognizes
exactly the eight statement forms of the command language, written one per
line; anything else (imports, control flow, unknown names, nested calls,
non-literal arguments, multi-statement lines) raises ProgramParseError with
the offending line and token. Nothing is ever evaluated.
"""

from __future__ import annotations

import ast

from ..errors import ProgramParseError
from .nodes import (
    MoveToMouth,
    PauseIndefinitely,
    Program,
    RobotVar,
    Scoop,
    ScrapeThenScoop,
    SetVar,
    Sleep,
    Start,
    Stmt,
    Stop,
)

_ZERO_ARG_CALLS = {
    "move_to_mouth": MoveToMouth,
    "start": Start,
    "stop": Stop,
    "pause_indefinitely": PauseIndefinitely,
}

_BOWL_CALLS = {
    "scoop_from_bowlno": Scoop,
    "scrape_then_scoop_bowlno": ScrapeThenScoop,
}

_VAR_NAMES = {v.value: v for v in RobotVar}

# Friendlier token names for common rejected constructs.
_NODE_TOKENS = {
    ast.Import: "import",
    ast.ImportFrom: "import",
    ast.For: "for",
    ast.AsyncFor: "for",
    ast.While: "while",
    ast.If: "if",
    ast.FunctionDef: "def",
    ast.AsyncFunctionDef: "def",
    ast.ClassDef: "class",
    ast.With: "with",
    ast.AsyncWith: "with",
    ast.Try: "try",
    ast.Lambda: "lambda",
    ast.Global: "global",
    ast.Nonlocal: "nonlocal",
    ast.Delete: "del",
    ast.Assert: "assert",
    ast.Raise: "raise",
    ast.Return: "return",
    ast.AugAssign: "augmented assignment",
    ast.AnnAssign: "annotated assignment",
}


def _node_token(node: ast.AST) -> str:
    return _NODE_TOKENS.get(type(node), type(node).__name__.lower())


def _reject(node: ast.AST, reason: str, token: str | None = None) -> ProgramParseError:
    line = getattr(node, "lineno", 1)
    return ProgramParseError(line, token if token is not None else _node_token(node), reason)


def _number_literal(node: ast.expr) -> float | None:
    """Unwrap an optionally signed int/float literal; None if not one."""
    sign = 1.0
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        sign = -1.0 if isinstance(node.op, ast.USub) else 1.0
        node = node.operand
    if isinstance(node, ast.Constant) and type(node.value) in (int, float):
        return sign * node.value
    return None


def _int_literal(node: ast.expr) -> int | None:
    sign = 1
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        sign = -1 if isinstance(node.op, ast.USub) else 1
        node = node.operand
    if isinstance(node, ast.Constant) and type(node.value) is int:
        return sign * node.value
    return None


def _parse_call(node: ast.Call) -> Stmt:
    if node.keywords:
        raise _reject(node, "keyword arguments are not allowed", "=")

    func = node.func
    # sleep(x) / time.sleep(x)
    is_sleep = (isinstance(func, ast.Name) and func.id == "sleep") or (
        isinstance(func, ast.Attribute)
        and isinstance(func.value, ast.Name)
        and func.value.id == "time"
        and func.attr == "sleep"
    )
    if is_sleep:
        if len(node.args) != 1:
            raise _reject(node, "sleep takes exactly one numeric argument", "sleep")
        seconds = _number_literal(node.args[0])
        if seconds is None:
            raise _reject(node, "sleep argument must be a numeric literal", "sleep")
        return Sleep(seconds=float(seconds))

    if not (
        isinstance(func, ast.Attribute)
        and isinstance(func.value, ast.Name)
        and func.value.id == "obi"
    ):
        token = func.id if isinstance(func, ast.Name) else _node_token(func)
        raise _reject(node, "unknown function", token)

    name = func.attr
    if name in _ZERO_ARG_CALLS:
        if node.args:
            raise _reject(node, f"obi.{name}() takes no arguments", f"obi.{name}")
        return _ZERO_ARG_CALLS[name]()

    if name in _BOWL_CALLS:
        if len(node.args) != 1:
            raise _reject(node, f"obi.{name}(bowlno) takes exactly one argument", f"obi.{name}")
        bowl = _int_literal(node.args[0])
        if bowl is None:
            raise _reject(node, "bowl index must be an integer literal", f"obi.{name}")
        return _BOWL_CALLS[name](bowl=bowl)

    raise _reject(node, "unknown robot function", f"obi.{name}")


def _parse_assign(node: ast.Assign) -> Stmt:
    if len(node.targets) != 1:
        raise _reject(node, "chained assignment is not allowed")
    target = node.targets[0]
    if not (
        isinstance(target, ast.Attribute)
        and isinstance(target.value, ast.Name)
        and target.value.id == "obi"
    ):
        raise _reject(node, "only obi.<variable> may be assigned", _node_token(target))
    if target.attr not in _VAR_NAMES:
        raise _reject(node, "unknown robot variable", f"obi.{target.attr}")
    value = _number_literal(node.value)
    if value is None:
        raise _reject(node, "variable value must be a numeric literal", f"obi.{target.attr}")
    return SetVar(var=_VAR_NAMES[target.attr], value=float(value))


def parse(code: str) -> Program:
    """Parse candidate code text into a Program or raise ProgramParseError."""
    if not code or not code.strip():
        raise ProgramParseError(1, "", "empty code text")

    try:
        module = ast.parse(code)
    except SyntaxError as exc:
        line = exc.lineno or 1
        text = (exc.text or "").strip()
        token = text.split()[0] if text else "?"
        raise ProgramParseError(line, token, f"not valid statement syntax: {exc.msg}") from None

    stmts: list[Stmt] = []
    seen_lines: set[int] = set()
    for node in module.body:
        if node.lineno != getattr(node, "end_lineno", node.lineno):
            raise _reject(node, "statement spans multiple lines")
        if node.lineno in seen_lines:
            raise _reject(node, "multiple statements on one line", ";")
        seen_lines.add(node.lineno)

        if isinstance(node, ast.Expr) and isinstance(node.value, ast.Call):
            stmts.append(_parse_call(node.value))
        elif isinstance(node, ast.Assign):
            stmts.append(_parse_assign(node))
        else:
            raise _reject(node, "statement form not in the command language")

    if not stmts:
        # comment-only text parses to nothing; treat like an empty completion
        raise ProgramParseError(1, "", "no statements found")

    return Program(stmts=tuple(stmts))
