"""Feeding-robot simulation: world model and tick-based executor."""

from .engine import (
    Engine,
    ExecutionHandle,
    READY_CUE,
    SCOOPING_CUE,
    SCRAPING_CUE,
    segment_duration_ms,
)
from .model import (
    EXEC_IDLE,
    EXEC_PAUSED,
    EXEC_RUNNING,
    EXEC_STOPPED,
    RobotState,
    TrajectorySegment,
    load_environment,
)

__all__ = [
    "Engine",
    "ExecutionHandle",
    "READY_CUE",
    "SCOOPING_CUE",
    "SCRAPING_CUE",
    "segment_duration_ms",
    "EXEC_IDLE",
    "EXEC_PAUSED",
    "EXEC_RUNNING",
    "EXEC_STOPPED",
    "RobotState",
    "TrajectorySegment",
    "load_environment",
]
