"""Protocol C: recursive fault detection with knowledge-ordered takeover.

Levels 1..log t split the processes into contiguous groups of size
``2**(log t - h + 1)``.  An active process first polls its groups from the
deepest level up, recording silent processes as retired, then performs the
real work (level 0), reporting each step to the next process in its level-1
group.  Inactive processes wait an exponentially shrinking deadline that
depends on how much they know, so the most knowledgeable survivor wakes
first.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Any, Iterable

from ..engine import Action, ConfigError, Envelope, GeneratorNode, idle
from ..messages import Poll, PollReply, ViewMsgC


def log2_exact(t: int) -> int:
    if t < 1 or t & (t - 1):
        raise ConfigError(f"t={t} must be a power of 2")
    return t.bit_length() - 1


def check_shape(n: int, t: int) -> None:
    log2_exact(t)
    if t < 2:
        raise ConfigError("protocol C needs t >= 2")
    if n < 1:
        raise ConfigError(f"n={n} must be positive")


def group_size(h: int, t: int) -> int:
    L = log2_exact(t)
    if not 1 <= h <= L:
        raise ValueError(f"level {h} outside 1..{L}")
    return 2 ** (L - h + 1)


def level_group(i: int, h: int, t: int) -> range:
    """Members of the level-``h`` group containing ``i``."""
    s = group_size(h, t)
    lo = (i // s) * s
    return range(lo, lo + s)


@lru_cache(maxsize=None)
def group_keys(t: int) -> tuple[tuple[int, int], ...]:
    """All (level, index) pairs in a fixed order."""
    L = log2_exact(t)
    return tuple((h, k) for h in range(1, L + 1) for k in range(t // group_size(h, t)))


def key_of(i: int, h: int, t: int) -> tuple[int, int]:
    return (h, i // group_size(h, t))


def cyclic_successor(p: int, group: range, excluded: Iterable[int]) -> int | None:
    ex = set(excluded)
    size = len(group)
    for step in range(1, size):
        q = group[0] + (p - group[0] + step) % size
        if q not in ex:
            return q
    return None


@dataclass(frozen=True)
class ViewC:
    """(F, point, round).  ``ptr``/``rd`` are indexed like ``group_keys(t)``."""

    t: int
    F: frozenset
    p0: int
    r0: int
    ptr: tuple[int, ...]
    rd: tuple[int, ...]

    @classmethod
    def initial(cls, i: int, t: int) -> "ViewC":
        ptrs = []
        for h, k in group_keys(t):
            s = group_size(h, t)
            members = [p for p in range(k * s, (k + 1) * s) if p != i]
            ptrs.append(members[0])
        return cls(t, frozenset(), 1, 0, tuple(ptrs), (0,) * len(ptrs))

    def index(self, key) -> int:
        return group_keys(self.t).index(key)

    def wire(self) -> dict:
        keys = [f"{h}.{k}" for h, k in group_keys(self.t)]
        return {
            "F": sorted(self.F),
            "point0": self.p0,
            "round0": self.r0,
            "point": dict(zip(keys, self.ptr)),
            "round": dict(zip(keys, self.rd)),
        }


def reduced_view(view: ViewC) -> int:
    return view.p0 - 1 + len(view.F)


def merge_view(local: ViewC, incoming: ViewC) -> ViewC:
    ptr, rd = list(local.ptr), list(local.rd)
    for x in range(len(ptr)):
        if incoming.rd[x] > rd[x]:
            ptr[x], rd[x] = incoming.ptr[x], incoming.rd[x]
    if incoming.p0 > local.p0:
        p0, r0 = incoming.p0, incoming.r0
    else:
        p0, r0 = local.p0, local.r0
    return ViewC(local.t, local.F | incoming.F, p0, r0, tuple(ptr), tuple(rd))


def k_constant(n: int, t: int, batched: bool = False) -> int:
    L = log2_exact(t)
    return (2 * n + 3 * t + 2 * L) if batched else (5 * t + 2 * L)


def deadline_d(i: int, m: int, n: int, t: int, batched: bool = False) -> int:
    if not 0 <= m <= n + t - 1:
        raise ValueError(f"reduced view {m} outside 0..{n + t - 1}")
    K = k_constant(n, t, batched)
    if m >= 1:
        return K * (n + t - m) * 2 ** (n + t - 1 - m)
    return K * (t - i) * (n + t) * 2 ** (n + t - 1)


class CProcess(GeneratorNode):
    """One process of Protocol C.

    With ``value_carrying`` set, ordinary messages also carry ``self.value``
    (used by the agreement construction).  ``unit_action`` maps a unit to the
    action performing it.
    """

    def __init__(self, i: int, n: int, t: int, *, batched: bool = False,
                 value_carrying: bool = False, unit_action=None, clock: int = 0):
        check_shape(n, t)
        if not 0 <= i < t:
            raise ConfigError(f"process {i} outside 0..{t - 1}")
        super().__init__(i)
        self.n, self.t, self.batched = n, t, batched
        self.L = log2_exact(t)
        self.view = ViewC.initial(i, t)
        self.value_carrying = value_carrying
        self.value: Any = None
        self.unit_action = unit_action or (lambda unit, rnd: Action(work=unit))
        self.clock = clock
        self.batch = -(-n // t)
        self._replies: list[int] = []
        self.ever_active = False
        self.reset_without_growth = 0

    # -- bookkeeping ---------------------------------------------------------
    def knowledge(self) -> dict:
        return {"m": reduced_view(self.view), "ever_active": self.ever_active, **self.view.wire()}

    def _wrap(self, act: Action, rnd: int) -> Action:
        if self._replies:
            extra = tuple(Envelope(self.pid, p, rnd, PollReply()) for p in self._replies)
            self._replies = []
            act = act.with_sends(extra)
        return act

    def _scan(self, inbox) -> tuple[list, set]:
        """Record poll senders to answer; return ordinary messages and reply senders."""
        ordinary, replied = [], set()
        for env in inbox:
            p = env.payload
            if isinstance(p, Poll):
                self._replies.append(env.sender)
            elif isinstance(p, PollReply):
                replied.add(env.sender)
            elif isinstance(p, ViewMsgC):
                ordinary.append(env)
        return ordinary, replied

    def _target(self, key) -> int | None:
        """Normalised pointer into an own group; updates the stored pointer."""
        x = self.view.index(key)
        h, k = key
        group = level_group(self.pid, h, self.t)
        p = self.view.ptr[x]
        ex = self.view.F | {self.pid}
        if p in ex:
            p = cyclic_successor(p, group, ex)
            if p is None:
                return None
            self._set(x, p, self.view.rd[x])
        return p

    def _set(self, x: int, p: int, r: int) -> None:
        ptr, rd = list(self.view.ptr), list(self.view.rd)
        ptr[x], rd[x] = p, r
        self.view = replace(self.view, ptr=tuple(ptr), rd=tuple(rd))

    def _advance(self, key) -> None:
        x = self.view.index(key)
        h, _ = key
        group = level_group(self.pid, h, self.t)
        nxt = cyclic_successor(self.view.ptr[x], group, self.view.F | {self.pid})
        if nxt is not None:
            self._set(x, nxt, self.view.rd[x])

    def _report(self, key, rnd: int) -> Action | None:
        """Ordinary message to the pointer of ``key``; None when nobody is left."""
        target = self._target(key)
        if target is None:
            return None
        x = self.view.index(key)
        self._set(x, target, rnd)
        self._advance(key)
        msg = ViewMsgC(self.view, self.value, self.value_carrying)
        return Action(sends=(Envelope(self.pid, target, rnd, msg),))

    # -- main loop -----------------------------------------------------------
    def run(self):
        rnd, inbox = yield
        if self.pid != 0:
            deadline = self.clock + deadline_d(self.pid, 0, self.n, self.t, self.batched)
            while True:
                ordinary, _ = self._scan(inbox)
                if ordinary:
                    before = reduced_view(self.view)
                    latest = 0
                    for env in ordinary:
                        self.view = merge_view(self.view, env.payload.view)
                        latest = max(latest, env.send_round)
                        if env.payload.carries_value:
                            self.value = env.payload.value
                    m = reduced_view(self.view)
                    if m <= before:
                        self.reset_without_growth += 1
                        self.note(event="no_growth", m=m)
                    deadline = latest + deadline_d(self.pid, m, self.n, self.t, self.batched)
                if rnd >= deadline:
                    break
                rnd, inbox = yield self._wrap(idle(wake=deadline), rnd)
        yield from self._active(rnd)

    def _active(self, rnd):
        self.mode = "active"
        self.ever_active = True
        self.note(event="activate", m=reduced_view(self.view))

        def emit(act):
            return self._wrap(act, rnd)

        for h in range(self.L, 0, -1):
            key = key_of(self.pid, h, self.t)
            group = level_group(self.pid, h, self.t)
            if set(group) - self.view.F == {self.pid}:
                continue
            while True:
                target = self._target(key)
                if target is None:
                    break
                rnd, inbox = yield emit(Action(sends=(Envelope(self.pid, target, rnd, Poll()),)))
                self._scan(inbox)
                wake = rnd + 1
                rnd, inbox = yield emit(idle(wake=wake))
                _, replied = self._scan(inbox)
                if target in replied:
                    break
                self.view = replace(self.view, F=self.view.F | {target})
                if h != self.L:
                    act = self._report(key_of(self.pid, h + 1, self.t), rnd)
                    if act is not None:
                        rnd, inbox = yield emit(act)
                        self._scan(inbox)
                if set(group) - self.view.F != {self.pid}:
                    self._advance(key)
                else:
                    break

        key1 = key_of(self.pid, 1, self.t)
        since = 0
        while self.view.p0 <= self.n:
            unit = self.view.p0
            act = self.unit_action(unit, rnd)
            self.view = replace(self.view, p0=unit + 1, r0=rnd)
            since += 1
            last = self.view.p0 > self.n
            report = not self.batched or since % self.batch == 0 or last
            if last and self._target(key1) is None:
                yield emit(Action(act.work, act.sends, True, 0, act.notes))
                return
            rnd, inbox = yield emit(act)
            self._scan(inbox)
            if report:
                rep = self._report(key1, rnd)
                if rep is None:
                    continue
                if self.view.p0 > self.n:
                    yield emit(Action(rep.work, rep.sends, True, 0, rep.notes))
                    return
                rnd, inbox = yield emit(rep)
                self._scan(inbox)
        # late waker, or nobody left to report to
        yield emit(Action(retire=True))
