"""Protocols A and B: one active process, checkpoints over sqrt(t) groups.

Work is cut into t subchunks of n/t units.  The active process tells the
rest of its own group after every subchunk (a partial checkpoint) and, after
every sqrt(t) subchunks, tells every later group one group at a time while
confirming each step to its own group (a full checkpoint).

A activates process j at the fixed round j(n+3t).  B measures timeouts from
the last ordinary message and adds a go-ahead phase inside a group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

from ..engine import Action, ConfigError, Envelope, GeneratorNode, idle
from ..messages import Full, GoAhead, Partial


def exact_sqrt(t: int) -> int:
    r = math.isqrt(t)
    if t < 1 or r * r != t:
        raise ConfigError(f"t={t} must be a perfect square")
    return r


def check_shape(n: int, t: int) -> None:
    exact_sqrt(t)
    if n < 1 or n % t:
        raise ConfigError(f"n={n} must be a positive multiple of t={t}")


def group_of(i: int, t: int) -> int:
    r = exact_sqrt(t)
    if not 0 <= i < t:
        raise ValueError(f"process {i} outside 0..{t - 1}")
    return i // r + 1


def group_members(g: int, t: int) -> range:
    r = exact_sqrt(t)
    return range((g - 1) * r, g * r)


def dd_a(j: int, n: int, t: int) -> int:
    if not 0 <= j < t:
        raise ValueError(f"process {j} outside 0..{t - 1}")
    return j * (n + 3 * t)


def pto(n: int, t: int) -> int:
    check_shape(n, t)
    return n // t + 2


def gto(i: int, n: int, t: int) -> int:
    r = exact_sqrt(t)
    check_shape(n, t)
    return n // r + 3 * r + (r - i % r - 1) * pto(n, t) + 1


def dd_b(j: int, i: int, n: int, t: int) -> int:
    if not 0 <= i < j < t:
        raise ValueError(f"need 0 <= i < j < t, got i={i}, j={j}, t={t}")
    gj, gi = group_of(j, t), group_of(i, t)
    if gj != gi:
        return gto(i, n, t) + (gj - gi - 1) * gto(0, n, t)
    return pto(n, t)


def tt(j: int, i: int, n: int, t: int) -> int:
    if not 0 <= i < j < t:
        raise ValueError(f"need 0 <= i < j < t, got i={i}, j={j}, t={t}")
    r = exact_sqrt(t)
    if group_of(j, t) != group_of(i, t):
        return dd_b(j, i, n, t) + (j % r) * pto(n, t)
    return (j % r - i % r) * pto(n, t)


@dataclass(frozen=True)
class Resume:
    """The last ordinary message a process has seen (c, optional g, sender)."""

    c: int = 0
    g: int | None = None
    sender: int = 0
    round: int = 0


FICTITIOUS = Resume()


@dataclass(frozen=True)
class Step:
    """One planned round of DoWork: a work unit or one send batch."""

    unit: int | None = None
    recipients: tuple[int, ...] = ()
    payload: Any = None

    @property
    def is_work(self) -> bool:
        return self.payload is None


def dowork_plan(resume: Resume, n: int, t: int, j: int) -> list[Step]:
    check_shape(n, t)
    r = exact_sqrt(t)
    c = resume.c
    if c >= t:
        return []
    gj = group_of(j, t)
    rest = tuple(range(j + 1, gj * r))
    steps: list[Step] = []

    def partial(c):
        steps.append(Step(recipients=rest, payload=Partial(c)))

    def full(c, first):
        for g in range(first, r + 1):
            steps.append(Step(recipients=tuple(group_members(g, t)), payload=Full(c, g)))
            steps.append(Step(recipients=rest, payload=Full(c, g)))

    if c > 0:
        if resume.g is not None:
            if group_of(resume.sender, t) != gj:
                partial(c)
                full(c, gj + 1)
            else:
                steps.append(Step(recipients=rest, payload=Full(c, resume.g)))
                full(c, resume.g + 1)
        else:
            partial(c)
            if c % r == 0:
                full(c, gj + 1)

    size = n // t
    for s in range(c + 1, t + 1):
        steps.extend(Step(unit=u) for u in range((s - 1) * size + 1, s * size + 1))
        partial(s)
        if s % r == 0:
            full(s, gj + 1)
    return steps


UnitAction = Callable[[int, int], Action]


class ABProcess(GeneratorNode):
    """Process ``vid`` of Protocol A (``variant='a'``) or B (``variant='b'``).

    The process may run over a virtual numbering: ``pids[v]`` is the engine
    id of virtual process ``v`` (``None`` for a padding slot that never
    exists), and ``clock`` is subtracted from engine rounds to get protocol
    rounds.  ``unit_action(unit, round)`` turns a planned unit into an
    action; by default it just performs the unit.
    """

    def __init__(
        self,
        vid: int,
        n: int,
        t: int,
        variant: str = "a",
        *,
        pids: Sequence[int | None] | None = None,
        clock: int = 0,
        unit_action: UnitAction | None = None,
    ):
        check_shape(n, t)
        self.pids = list(range(t)) if pids is None else list(pids)
        if len(self.pids) != t or self.pids[vid] is None:
            raise ConfigError("virtual numbering must cover every slot and include this process")
        super().__init__(self.pids[vid])
        if variant not in ("a", "b"):
            raise ConfigError(f"unknown variant {variant!r}")
        self.vid, self.n, self.t, self.variant = vid, n, t, variant
        self.root = exact_sqrt(t)
        self.clock = clock
        self.unit_action = unit_action or (lambda unit, rnd: Action(work=unit))
        self.vid_of = {p: v for v, p in enumerate(self.pids) if p is not None}
        self.last = FICTITIOUS
        self.go_aheads_sent = 0

    # -- helpers -----------------------------------------------------------
    def _terminal(self) -> bool:
        last = self.last
        if last.c != self.t:
            return False
        return last.g is None or last.g == group_of(self.vid, self.t)

    def _absorb(self, inbox) -> bool:
        """Fold ordinary messages into ``last``; report whether a go-ahead arrived."""
        got_go_ahead = False
        best = None
        for env in inbox:
            v = self.vid_of.get(env.sender)
            if v is None:
                continue
            p = env.payload
            if isinstance(p, GoAhead):
                got_go_ahead = True
            elif isinstance(p, (Partial, Full)):
                if best is None or v < best[0]:
                    best = (v, env, p)
        if best is not None:
            v, env, p = best
            self.last = Resume(p.c, getattr(p, "g", None), v, env.send_round - self.clock)
        return got_go_ahead

    def _envelopes(self, recipients, payload, rnd) -> tuple[Envelope, ...]:
        return tuple(
            Envelope(self.pid, self.pids[v], rnd, payload)
            for v in recipients
            if self.pids[v] is not None
        )

    def _dowork(self, rnd):
        self.mode = "active"
        self.note(event="activate", resume=[self.last.c, self.last.g, self.last.sender])
        plan = dowork_plan(self.last, self.n, self.t, self.vid)
        if not plan:
            return
        for k, step in enumerate(plan):
            if step.is_work:
                act = self.unit_action(step.unit, rnd)
            else:
                act = Action(sends=self._envelopes(step.recipients, step.payload, rnd))
            if k == len(plan) - 1:
                act = Action(act.work, act.sends, True, 0, act.notes)
                yield act
                return
            rnd, _ = yield act

    # -- main loops --------------------------------------------------------
    def run(self):
        rnd, inbox = yield
        if self.vid == 0:
            yield from self._dowork(rnd)
            return
        if self.variant == "a":
            yield from self._run_a(rnd, inbox)
        else:
            yield from self._run_b(rnd, inbox)

    def _run_a(self, rnd, inbox):
        start = dd_a(self.vid, self.n, self.t) + self.clock
        while True:
            self._absorb(inbox)
            if self._terminal():
                return
            if rnd >= start:
                break
            rnd, inbox = yield idle(wake=start)
        yield from self._dowork(rnd)

    def _deadline(self) -> int:
        return self.clock + self.last.round + dd_b(self.vid, self.last.sender, self.n, self.t)

    def _run_b(self, rnd, inbox):
        period = pto(self.n, self.t)
        while True:
            # passive: wait for the deadline
            go = self._absorb(inbox)
            if self._terminal():
                return
            if go:
                if self.last.c < self.t:
                    yield from self._dowork(rnd)
                return
            deadline = self._deadline()
            if rnd < deadline:
                rnd, inbox = yield idle(wake=deadline)
                continue
            if self.last.c >= self.t:
                return
            # preactive
            self.mode = "preactive"
            i = self.last.sender
            if group_of(i, self.t) != group_of(self.vid, self.t):
                first = (group_of(self.vid, self.t) - 1) * self.root
            else:
                first = i + 1
            candidates = list(range(first, self.vid))
            r0 = rnd
            self.note(event="preactive", candidates=candidates)
            outcome = "activate"
            for k, cand in enumerate(candidates):
                sends = self._envelopes((cand,), GoAhead(), rnd)
                self.go_aheads_sent += 1
                nxt = r0 + (k + 1) * period
                rnd, inbox = yield Action(sends=sends)
                while True:
                    before = self.last
                    go = self._absorb(inbox)
                    if self._terminal():
                        self.mode = "inactive"
                        return
                    if go:
                        outcome = "go"
                        break
                    if self.last is not before:
                        outcome = "passive"
                        break
                    if rnd >= nxt:
                        break
                    rnd, inbox = yield idle(wake=nxt)
                if outcome != "activate":
                    break
            if outcome == "passive":
                self.mode = "inactive"
                inbox = []
                continue
            if outcome == "go" and self.last.c >= self.t:
                return
            yield from self._dowork(rnd)
            return
