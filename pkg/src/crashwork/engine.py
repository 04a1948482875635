"""Lock-step synchronous round engine.

Every alive process is asked for exactly one :class:`Action` per round.
Messages sent in round ``r`` land in the recipients' inboxes at the start of
round ``r + 1``.  The adversary sees the proposed actions of a round before
they take effect and may crash any alive process; a crashed sender's batch is
cut down to the recipients the adversary names.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol, Sequence

FOREVER = math.inf

MESSAGE_KINDS = ("ordinary", "go_ahead", "poll", "poll_reply", "view_d", "inform")


class ConfigError(ValueError):
    """Raised for configurations a protocol or the engine refuses to run."""


class LivelockError(RuntimeError):
    """No future event can occur but some process has not retired."""


class ProtocolViolation(RuntimeError):
    """A protocol detected a state its correctness argument rules out."""


@dataclass
class Violation:
    round: int
    invariant: str
    detail: str

    def to_json(self) -> dict:
        return {"round": self.round, "invariant": self.invariant, "detail": self.detail}


class InvariantViolation(RuntimeError):
    def __init__(self, violation: Violation):
        super().__init__(f"round {violation.round}: {violation.invariant}: {violation.detail}")
        self.violation = violation


@dataclass(frozen=True)
class Envelope:
    sender: int
    recipient: int
    send_round: int
    payload: Any

    def __post_init__(self):
        if self.sender == self.recipient:
            raise ValueError(f"process {self.sender} cannot message itself")

    def to_json(self) -> dict:
        return {
            "from": self.sender,
            "to": self.recipient,
            "sent": self.send_round,
            "payload": self.payload.wire(),
        }


@dataclass(frozen=True)
class Action:
    """One process's move in one round.

    ``work`` is the unit performed (if any), ``sends`` the envelopes emitted
    this round.  A plain idle action may carry ``wake``: the earliest round at
    which the process can act again without receiving a message (0 means the
    next round).  ``retire`` terminates the process at the end of the round.
    ``notes`` are protocol annotations copied into the trace.
    """

    work: Any = None
    sends: tuple[Envelope, ...] = ()
    retire: bool = False
    wake: float = 0
    notes: tuple[dict, ...] = ()

    @property
    def is_idle(self) -> bool:
        return self.work is None and not self.sends and not self.retire

    def with_sends(self, extra: Sequence[Envelope]) -> "Action":
        if not extra:
            return self
        return Action(self.work, self.sends + tuple(extra), self.retire, 0, self.notes)

    def describe(self) -> dict:
        if self.work is not None:
            kind = "work"
        elif self.sends:
            kind = "send"
        elif self.retire:
            kind = "retire"
        else:
            kind = "idle"
        out: dict[str, Any] = {"kind": kind}
        if self.work is not None:
            out["unit"] = self.work
        return out


IDLE = Action()


def idle(wake: float = 0, notes: tuple[dict, ...] = ()) -> Action:
    return Action(wake=wake, notes=notes)


def retire(notes: tuple[dict, ...] = ()) -> Action:
    return Action(retire=True, notes=notes)


def broadcast(sender: int, recipients: Iterable[int], rnd: int, payload: Any) -> tuple[Envelope, ...]:
    return tuple(Envelope(sender, r, rnd, payload) for r in recipients if r != sender)


class Node(Protocol):
    pid: int
    mode: str

    def step(self, rnd: int, inbox: list[Envelope]) -> Action: ...

    def knowledge(self) -> dict | None: ...


class GeneratorNode:
    """Base for processes written as generators.

    Subclasses implement ``run``; it receives ``(round, inbox)`` pairs through
    ``yield`` and yields :class:`Action` values.  Returning from ``run``
    retires the process.  Rounds may be skipped when every process is idle,
    so ``run`` must reason from the round number, never by counting resumes.
    """

    def __init__(self, pid: int):
        self.pid = pid
        self.mode = "inactive"
        self._gen = None
        self._pending_notes: list[dict] = []

    def run(self):  # pragma: no cover - abstract
        raise NotImplementedError
        yield

    def note(self, **fields) -> None:
        self._pending_notes.append(fields)

    def knowledge(self) -> dict | None:
        return None

    def step(self, rnd: int, inbox: list[Envelope]) -> Action:
        if self._gen is None:
            self._gen = self.run()
            next(self._gen)
        try:
            action = self._gen.send((rnd, inbox))
        except StopIteration:
            action = Action(retire=True)
        if self._pending_notes:
            notes = tuple(self._pending_notes)
            self._pending_notes = []
            action = Action(action.work, action.sends, action.retire, action.wake, action.notes + notes)
        if action.retire:
            self.mode = "retired"
        return action


@dataclass(frozen=True)
class CrashEvent:
    process: int
    round: int
    delivered_subset: frozenset = frozenset()
    pre_action: bool = False

    def to_json(self) -> dict:
        return {
            "process": self.process,
            "round": self.round,
            "deliver_to": sorted(self.delivered_subset),
            "pre_action": self.pre_action,
        }


@dataclass
class RoundContext:
    round: int
    proposals: dict[int, Action]
    alive: tuple[int, ...]
    quiet: bool
    crashed: frozenset


class Adversary(Protocol):
    def decide(self, ctx: RoundContext) -> list[CrashEvent]: ...

    def next_event_round(self, after: int) -> float: ...


class NoCrashes:
    def decide(self, ctx: RoundContext) -> list[CrashEvent]:
        return []

    def next_event_round(self, after: int) -> float:
        return FOREVER


@dataclass
class Metrics:
    work_total: int = 0
    work_redundant: int = 0
    messages: dict[str, int] = field(default_factory=lambda: {k: 0 for k in MESSAGE_KINDS})
    rounds_until_all_retired: int = 0
    completed: bool = False
    failures_injected: int = 0
    decisions: dict[int, Any] | None = None

    @property
    def messages_total(self) -> int:
        return sum(self.messages.values())

    @property
    def effort(self) -> int:
        return self.work_total + self.messages_total

    def to_json(self, **header) -> dict:
        out = dict(header)
        out.update(
            work_total=self.work_total,
            work_redundant=self.work_redundant,
            messages={**self.messages, "total": self.messages_total},
            rounds_until_all_retired=self.rounds_until_all_retired,
            completed=self.completed,
            failures_injected=self.failures_injected,
        )
        if self.decisions is not None:
            out["decisions"] = {str(k): v for k, v in sorted(self.decisions.items())}
        return out


@dataclass
class RoundRecord:
    round: int
    events: list[dict]


@dataclass
class ExecutionTrace:
    protocol: str
    n: int
    t: int
    procs: int
    rounds: list[RoundRecord] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"round": r.round, "events": r.events}, sort_keys=True, separators=(",", ":")) + "\n"
            for r in self.rounds
        )

    @classmethod
    def from_jsonl(cls, text: str, protocol: str, n: int, t: int, procs: int | None = None) -> "ExecutionTrace":
        tr = cls(protocol, n, t, t if procs is None else procs)
        for line in text.splitlines():
            if line.strip():
                obj = json.loads(line)
                tr.rounds.append(RoundRecord(obj["round"], obj["events"]))
        return tr


@dataclass
class RunResult:
    trace: ExecutionTrace
    metrics: Metrics
    nodes: list


Observer = Callable[[RoundRecord, "Engine"], None]


class Engine:
    """Runs one execution.

    ``nodes`` are indexed by process id; ``units`` is the set of real work
    units whose first performance counts toward completion.
    """

    def __init__(
        self,
        nodes: Sequence[Node],
        adversary: Adversary | None = None,
        *,
        units: Iterable[Any] = (),
        observers: Sequence[Observer] = (),
        fast_forward: bool = True,
        protocol: str = "",
        n: int = 0,
        t: int = 0,
        max_rounds: float = FOREVER,
    ):
        self.nodes = list(nodes)
        for i, nd in enumerate(self.nodes):
            if nd.pid != i:
                raise ConfigError(f"node at index {i} has pid {nd.pid}")
        self.adversary = adversary or NoCrashes()
        self.units = set(units)
        self.observers = list(observers)
        self.fast_forward = fast_forward
        self.max_rounds = max_rounds
        self.alive: set[int] = set(range(len(self.nodes)))
        self.crashed: set[int] = set()
        self.terminated: set[int] = set()
        self.wake: dict[int, float] = {i: 1 for i in self.alive}
        self.in_flight: list[Envelope] = []
        self.round = 0
        self.metrics = Metrics()
        self.trace = ExecutionTrace(protocol, n, t, len(self.nodes))
        self._performed: dict[Any, int] = defaultdict(int)
        self._knowledge: dict[int, Any] = {}

    # -- scheduling -------------------------------------------------------
    def next_event_round(self) -> float:
        """Earliest round at which anything can happen, given no messages in flight."""
        if self.in_flight:
            return self.round + 1
        earliest = min((self.wake[i] for i in self.alive), default=FOREVER)
        earliest = min(earliest, self.adversary.next_event_round(self.round))
        if earliest == FOREVER:
            raise LivelockError(f"after round {self.round}: processes {sorted(self.alive)} wait forever")
        return max(self.round + 1, earliest)

    def deliver(self, rnd: int) -> tuple[dict[int, list[Envelope]], list[dict]]:
        inboxes: dict[int, list[Envelope]] = defaultdict(list)
        events: list[dict] = []
        for env in self.in_flight:
            if env.send_round != rnd - 1:
                raise AssertionError("envelope delivered out of order")
            if env.recipient in self.alive:
                inboxes[env.recipient].append(env)
                events.append({"type": "deliver", **env.to_json()})
            else:
                events.append({"type": "drop", **env.to_json()})
        self.in_flight = []
        return inboxes, events

    # -- main loop ----------------------------------------------------------
    def run(self) -> RunResult:
        while self.alive:
            nxt = self.next_event_round() if self.fast_forward else self.round + 1
            if nxt > self.max_rounds:
                raise LivelockError(f"exceeded {self.max_rounds} rounds")
            self.step_round(int(nxt))
        self.metrics.completed = self.units <= set(self._performed)
        return RunResult(self.trace, self.metrics, self.nodes)

    def step_round(self, rnd: int) -> RoundRecord:
        self.round = rnd
        inboxes, events = self.deliver(rnd)
        quiet = not events

        proposals: dict[int, Action] = {}
        modes_before = {i: self.nodes[i].mode for i in self.alive}
        for i in sorted(self.alive):
            proposals[i] = self.nodes[i].step(rnd, inboxes.get(i, []))
            if proposals[i].sends or proposals[i].work is not None or proposals[i].retire:
                quiet = False

        ctx = RoundContext(rnd, proposals, tuple(sorted(self.alive)), quiet, frozenset(self.crashed))
        crashes = {}
        for ev in self.adversary.decide(ctx):
            if ev.process not in self.alive:
                raise ConfigError(f"round {rnd}: crash of process {ev.process}, which is not alive")
            if ev.process in crashes:
                raise ConfigError(f"round {rnd}: process {ev.process} crashed twice")
            if ev.round != rnd:
                raise ConfigError(f"round {rnd}: crash event stamped for round {ev.round}")
            recipients = {e.recipient for e in proposals[ev.process].sends}
            if not ev.delivered_subset <= recipients:
                raise ConfigError(
                    f"round {rnd}: delivered subset {sorted(ev.delivered_subset)} of process "
                    f"{ev.process} is not within its recipients {sorted(recipients)}"
                )
            crashes[ev.process] = ev

        for i in sorted(proposals):
            act = proposals[i]
            crash = crashes.get(i)
            if crash is not None and crash.pre_action:
                act = Action()
            elif crash is not None:
                act = Action(act.work, tuple(e for e in act.sends if e.recipient in crash.delivered_subset),
                             act.retire, act.wake, act.notes)
            self._apply(i, act, events)
            if crash is not None:
                events.append({"type": "crash", **crash.to_json()})
                self.alive.discard(i)
                self.crashed.add(i)
                self.metrics.failures_injected += 1
                self.metrics.rounds_until_all_retired = rnd
                continue
            mode = self.nodes[i].mode
            if mode != modes_before[i] and not act.retire:
                events.append({"type": "mode", "process": i, "from": modes_before[i], "to": mode})
            k = self.nodes[i].knowledge()
            if k is not None and self._knowledge.get(i) != k:
                self._knowledge[i] = k
                events.append({"type": "state", "process": i, "state": k})
            if act.retire:
                self.alive.discard(i)
                self.terminated.add(i)
                events.append({"type": "retire", "process": i})
                self.metrics.rounds_until_all_retired = rnd
            self.wake[i] = act.wake if act.is_idle and act.wake else rnd + 1

        record = RoundRecord(rnd, events)
        if events:
            self.trace.rounds.append(record)
        for obs in self.observers:
            obs(record, self)
        return record

    def _apply(self, i: int, act: Action, events: list[dict]) -> None:
        for note in act.notes:
            events.append({"type": "note", "process": i, **note})
        if act.work is not None:
            self.metrics.work_total += 1
            if self._performed[act.work]:
                self.metrics.work_redundant += 1
            self._performed[act.work] += 1
            events.append({"type": "work", "process": i, "unit": act.work})
        for env in act.sends:
            self.metrics.messages[env.payload.metric_kind] += 1
            self.in_flight.append(env)
            events.append({"type": "send", **env.to_json()})


def run(nodes: Sequence[Node], adversary: Adversary | None = None, **kwargs) -> RunResult:
    return Engine(nodes, adversary, **kwargs).run()
