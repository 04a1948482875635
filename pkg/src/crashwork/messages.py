"""Message payloads for every protocol.

Each payload knows its metric bucket (``metric_kind``) and its trace form
(``wire``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class Partial:
    c: int
    metric_kind = "ordinary"

    def wire(self) -> dict:
        return {"kind": "partial", "c": self.c}


@dataclass(frozen=True)
class Full:
    c: int
    g: int
    metric_kind = "ordinary"

    def wire(self) -> dict:
        return {"kind": "full", "c": self.c, "g": self.g}


@dataclass(frozen=True)
class GoAhead:
    metric_kind = "go_ahead"

    def wire(self) -> dict:
        return {"kind": "goahead"}


@dataclass(frozen=True)
class Poll:
    metric_kind = "poll"

    def wire(self) -> dict:
        return {"kind": "poll"}


@dataclass(frozen=True)
class PollReply:
    metric_kind = "poll_reply"

    def wire(self) -> dict:
        return {"kind": "poll_reply"}


@dataclass(frozen=True)
class ViewMsgC:
    view: Any  # crashwork.protocols.c.ViewC, frozen
    value: Any = None
    carries_value: bool = False
    metric_kind = "ordinary"

    def wire(self) -> dict:
        out = {"kind": "ordinary_c", "view": self.view.wire()}
        if self.carries_value:
            out["value"] = self.value
        return out


@dataclass(frozen=True)
class ViewMsgD:
    sender: int
    S: frozenset
    T: frozenset
    done: bool
    metric_kind = "view_d"

    def wire(self) -> dict:
        return {"kind": "view_d", "S": sorted(self.S), "T": sorted(self.T), "done": self.done}


@dataclass(frozen=True)
class Inform:
    value: Any
    metric_kind = "inform"

    def wire(self) -> dict:
        return {"kind": "inform", "value": self.value}


@dataclass(frozen=True)
class Checkpoint:
    """Per-unit checkpoint of the naive leader baseline."""

    unit: int
    metric_kind = "ordinary"

    def wire(self) -> dict:
        return {"kind": "checkpoint", "unit": self.unit}


ORDINARY_AB = (Partial, Full)
