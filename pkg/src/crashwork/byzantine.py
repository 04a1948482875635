"""Agreement on a general's value, built on a sequential work protocol.

Round 1: the general (process 0) sends its value to the other senders.
From round 2 the senders run Protocol A, B or C where unit ``j`` means
"inform process j-1 of my current value".  Every process adopts any value
it is told and decides at a fixed round by which the work protocol must
have finished.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from .engine import (
    Action,
    ConfigError,
    Engine,
    Envelope,
    GeneratorNode,
    ProtocolViolation,
    RunResult,
    idle,
)
from .messages import Inform, ViewMsgC
from .protocols.ab import ABProcess
from .protocols.c import CProcess


@dataclass(frozen=True)
class BAConfig:
    n_procs: int
    t: int
    engine: str = "a"
    value: Any = 1
    default: Any = 0

    @property
    def workers(self) -> int:
        return worker_count(self.engine, self.t)

    def units(self) -> int:
        s = self.workers
        if self.engine in ("a", "b"):
            return s * -(-self.n_procs // s)
        return self.n_procs

    def validate(self) -> None:
        if self.t < 1:
            raise ConfigError("t must be >= 1")
        if self.engine not in ("a", "b", "c"):
            raise ConfigError(f"unknown agreement engine {self.engine!r}")
        if self.n_procs < self.workers:
            raise ConfigError(
                f"n_procs={self.n_procs} is below the {self.workers} senders engine {self.engine} needs for t={self.t}"
            )


def worker_count(engine: str, t: int) -> int:
    """Smallest sender count >= t+1 that the engine's shape rules accept."""
    need = t + 1
    if engine in ("a", "b"):
        r = math.isqrt(need - 1) + 1
        return r * r
    if engine == "c":
        return max(2, 1 << (need - 1).bit_length())
    raise ConfigError(f"unknown agreement engine {engine!r}")


def engine_bound(engine: str, units: int, workers: int):
    from .oracle.bounds import bound_for

    return bound_for(engine, units, workers)


def decision_round(cfg: BAConfig) -> int:
    return 1 + int(engine_bound(cfg.engine, cfg.units(), cfg.workers).round_bound) + 1


def ba_bound(engine: str, n_procs: int, t: int):
    from .oracle.bounds import BoundRecord

    cfg = BAConfig(n_procs, t, engine)
    cfg.validate()
    eb = engine_bound(engine, cfg.units(), cfg.workers)
    return BoundRecord(
        f"ba-{engine}",
        eb.work_bound,
        (cfg.workers - 1) + eb.message_bound + eb.work_bound,
        decision_round(cfg),
        (f"{cfg.workers} senders", "each unit sends at most one inform"),
    )


def adopt_value(current, inbox):
    """Value carried by this round's messages, else ``current``."""
    seen = set()
    for env in inbox:
        p = env.payload
        if isinstance(p, Inform):
            seen.add(p.value)
        elif isinstance(p, ViewMsgC) and p.carries_value:
            seen.add(p.value)
    if len(seen) > 1:
        raise ProtocolViolation(f"two values reported in the same round: {sorted(map(repr, seen))}")
    return seen.pop() if seen else current


class BAProcess(GeneratorNode):
    def __init__(self, pid: int, cfg: BAConfig):
        super().__init__(pid)
        self.cfg = cfg
        self.value = cfg.default
        self.decision = None
        self.deadline = decision_round(cfg)
        self.sub = None
        if pid < cfg.workers:
            units = cfg.units()
            if cfg.engine == "c":
                self.sub = CProcess(pid, units, cfg.workers, value_carrying=True,
                                    unit_action=self._inform, clock=1)
            else:
                self.sub = ABProcess(pid, units, cfg.workers, cfg.engine, clock=1,
                                     unit_action=self._inform)

    def _inform(self, unit: int, rnd: int) -> Action:
        if unit > self.cfg.n_procs:
            return Action()
        target = unit - 1
        if target == self.pid:
            return Action(work=unit)
        return Action(work=unit, sends=(Envelope(self.pid, target, rnd, Inform(self.value)),))

    def knowledge(self):
        out = {"value": self.value}
        if self.sub is not None:
            inner = self.sub.knowledge()
            if inner:
                out.update(inner)
            if self.mode == "listening":
                out["listening"] = True
        return out

    def run(self):
        rnd, inbox = yield
        if self.pid == 0:
            self.value = self.cfg.value
            sends = tuple(Envelope(0, p, rnd, Inform(self.value)) for p in range(1, self.cfg.workers))
            rnd, inbox = yield Action(sends=sends)
        elif rnd < 2:
            rnd, inbox = yield idle(wake=2)
        if self.sub is not None:
            while True:
                self.value = adopt_value(self.value, inbox)
                self.sub.value = self.value
                act = self.sub.step(rnd, inbox)
                self.mode = self.sub.mode
                if act.retire:
                    self.mode = "listening"
                    rnd, inbox = yield Action(act.work, act.sends, False, 0, act.notes)
                    break
                rnd, inbox = yield act
        self.mode = "listening"
        while True:
            self.value = adopt_value(self.value, inbox)
            if rnd >= self.deadline:
                self.decision = self.value
                self.note(event="decide", value=self.value)
                return
            rnd, inbox = yield idle(wake=self.deadline)


def ba_run(cfg: BAConfig, adversary=None, *, observers=(), fast_forward: bool = True) -> RunResult:
    cfg.validate()
    nodes = [BAProcess(p, cfg) for p in range(cfg.n_procs)]
    eng = Engine(nodes, adversary, units=range(1, cfg.n_procs + 1), observers=observers,
                 fast_forward=fast_forward, protocol=f"ba-{cfg.engine}", n=cfg.n_procs, t=cfg.t)
    res = eng.run()
    res.metrics.decisions = {nd.pid: nd.decision for nd in nodes if nd.pid not in eng.crashed}
    return res
