"""Crash adversaries: none, a fixed schedule, or a seeded random one."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .engine import FOREVER, ConfigError, CrashEvent, NoCrashes, RoundContext

__all__ = ["NoCrashes", "ScheduleAdversary", "RandomAdversary", "load_scenario"]


class ScheduleAdversary:
    """Replays a fixed list of crash events.

    Events naming a process that has already terminated are ignored; the
    process is beyond the adversary's reach.
    """

    def __init__(self, events: Iterable[CrashEvent]):
        self.events = sorted(events, key=lambda e: (e.round, e.process))
        seen = set()
        for ev in self.events:
            if ev.process in seen:
                raise ConfigError(f"process {ev.process} is scheduled to crash twice")
            if ev.round < 1:
                raise ConfigError(f"crash round {ev.round} must be >= 1")
            seen.add(ev.process)
        self._by_round: dict[int, list[CrashEvent]] = {}
        for ev in self.events:
            self._by_round.setdefault(ev.round, []).append(ev)

    def decide(self, ctx: RoundContext) -> list[CrashEvent]:
        return [ev for ev in self._by_round.get(ctx.round, []) if ev.process in ctx.proposals]

    def next_event_round(self, after: int) -> float:
        return min((ev.round for ev in self.events if ev.round > after), default=FOREVER)

    def to_json(self) -> dict:
        return {"crashes": [ev.to_json() for ev in self.events]}


def load_scenario(path: str | Path) -> ScheduleAdversary:
    data = json.loads(Path(path).read_text())
    events = []
    for entry in data.get("crashes", []):
        events.append(
            CrashEvent(
                process=int(entry["process"]),
                round=int(entry["round"]),
                delivered_subset=frozenset(entry.get("deliver_to", [])),
                pre_action=bool(entry.get("pre_action", False)),
            )
        )
    return ScheduleAdversary(events)


@dataclass
class RandomAdversary:
    """Each alive process crashes with probability ``p`` on every eventful round.

    Quiet rounds (no deliveries and nobody acting) draw no randomness, so
    fast-forwarding over them changes nothing.  A crashing sender reaches a
    uniformly chosen prefix of its sorted recipients; the crash is pre-action
    with probability 1/2.
    """

    seed: int
    p: float
    max_crashes: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"crash probability {self.p} outside [0, 1]")
        self.rng = random.Random(self.seed)
        self.crashes = 0

    def decide(self, ctx: RoundContext) -> list[CrashEvent]:
        if ctx.quiet:
            return []
        out = []
        for pid in ctx.alive:
            if self.crashes >= self.max_crashes:
                break
            if self.rng.random() >= self.p:
                continue
            recipients = sorted({e.recipient for e in ctx.proposals[pid].sends})
            k = self.rng.randint(0, len(recipients))
            pre = self.rng.random() < 0.5
            out.append(CrashEvent(pid, ctx.round, frozenset(recipients[:k]), pre))
            self.crashes += 1
        return out

    def next_event_round(self, after: int) -> float:
        return FOREVER
