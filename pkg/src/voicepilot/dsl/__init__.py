"""Restricted robot command language: AST, parser, printer, safety validator."""

from .nodes import (
    BITE_STMTS,
    BOWL_COUNT,
    CONTROL_STMTS,
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
    format_number,
    pretty_print,
    stmt_to_source,
)
from .parser import parse
from .validator import (
    Clip,
    Insertion,
    Rejection,
    SafetyReport,
    VariableSpec,
    default_variable_specs,
    describe_variable,
    enforce_inter_bite_pause,
    report_from_parse_error,
    report_from_validation_error,
    scale_variable,
    validate,
)

__all__ = [
    "BITE_STMTS",
    "BOWL_COUNT",
    "CONTROL_STMTS",
    "Clip",
    "Insertion",
    "MoveToMouth",
    "PauseIndefinitely",
    "Program",
    "Rejection",
    "RobotVar",
    "SafetyReport",
    "Scoop",
    "ScrapeThenScoop",
    "SetVar",
    "Sleep",
    "Start",
    "Stmt",
    "Stop",
    "VariableSpec",
    "default_variable_specs",
    "describe_variable",
    "enforce_inter_bite_pause",
    "format_number",
    "parse",
    "pretty_print",
    "report_from_parse_error",
    "report_from_validation_error",
    "scale_variable",
    "stmt_to_source",
    "validate",
]
