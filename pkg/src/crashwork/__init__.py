"""Simulator and verification harness for crash-tolerant work distribution."""

from .engine import (
    Action,
    ConfigError,
    CrashEvent,
    Engine,
    Envelope,
    ExecutionTrace,
    InvariantViolation,
    LivelockError,
    Metrics,
    RunResult,
    run,
)

__all__ = [
    "Action",
    "ConfigError",
    "CrashEvent",
    "Engine",
    "Envelope",
    "ExecutionTrace",
    "InvariantViolation",
    "LivelockError",
    "Metrics",
    "RunResult",
    "run",
]
