"""Protocol D: parallel work phases separated by agreement phases.

All processes thought correct split the outstanding units by rank and work
in parallel; an agreement phase then settles which units remain and which
processes are still alive.  If more than half of the processes alive at the
start of a phase are lost, the survivors finish the remaining units with
Protocol A.
"""

from __future__ import annotations

import math

from ..engine import Action, ConfigError, Envelope, GeneratorNode, idle
from ..messages import ViewMsgD
from .ab import ABProcess


def grade(S, s) -> int:
    return sum(1 for x in S if x < s)


def allot(S, T, j) -> set:
    if j not in T:
        raise ValueError(f"process {j} is not in T={sorted(T)}")
    if not S:
        return set()
    q = -(-len(S) // len(T))
    g = grade(T, j)
    return set(sorted(S)[g * q:(g + 1) * q])


def check_shape(n: int, t: int) -> None:
    if n < 1 or t < 1:
        raise ConfigError(f"need n >= 1 and t >= 1, got n={n}, t={t}")


def fallback_shape(survivors: int, units: int) -> tuple[int, int]:
    """(t_A, n_A) for the fallback run: pad up to a square and a multiple."""
    ta = math.isqrt(survivors - 1) + 1 if survivors > 1 else 1
    ta *= ta
    na = ta * -(-units // ta)
    return ta, na


class DProcess(GeneratorNode):
    def __init__(self, j: int, n: int, t: int, *, fallback: bool = True):
        check_shape(n, t)
        super().__init__(j)
        self.n, self.t = n, t
        self.allow_fallback = fallback
        self.mode = "work"
        self.phase = 0
        self.S = set(range(1, n + 1))
        self.T = set(range(t))

    def _broadcast(self, U, rnd, done) -> tuple[Envelope, ...]:
        msg = ViewMsgD(self.pid, frozenset(self.S), frozenset(self.T), done)
        return tuple(Envelope(self.pid, i, rnd, msg) for i in sorted(U) if i != self.pid)

    def run(self):
        rnd, inbox = yield
        round_var = 1
        while self.S:
            self.phase += 1
            if self.pid not in self.T:
                self.note(event="excluded", phase=self.phase)
                return
            mine = allot(self.S, self.T, self.pid)
            length = -(-len(self.S) // len(self.T))
            self.mode = "work"
            end = rnd + length
            for u in sorted(mine):
                rnd, inbox = yield Action(work=u)
            while rnd < end:
                rnd, inbox = yield idle(wake=end)
            self.S -= mine
            before = set(self.T)

            # agreement phase; messages already waiting belong to the previous phase
            self.mode = "agree"
            done = False
            U = set(self.T)
            self.T = {self.pid}
            while True:
                Uj = set(U)
                rnd, inbox = yield Action(sends=self._broadcast(U, rnd, done))
                views = {}
                for env in inbox:
                    if isinstance(env.payload, ViewMsgD) and env.sender in Uj:
                        views[env.sender] = env.payload
                for i in sorted(views):
                    if not views[i].done:
                        self.S &= views[i].S
                        self.T |= views[i].T
                for i in sorted(views):
                    if views[i].done:
                        self.S, self.T = set(views[i].S), set(views[i].T)
                        done = True
                if round_var >= 1:
                    U -= {i for i in Uj if i not in views and i != self.pid}
                    if U == Uj:
                        done = True
                round_var += 1
                if done:
                    break

            final = self._broadcast(U, rnd, True)
            use_fallback = self.allow_fallback and len(before) > 2 * len(self.T) and bool(self.S)
            self.note(event="phase_end", phase=self.phase, S=sorted(self.S), T=sorted(self.T),
                      fallback=use_fallback)
            if not self.S:
                self.mode = "halted"
                yield Action(sends=final, retire=True)
                return
            rnd, inbox = yield Action(sends=final)
            if use_fallback:
                yield from self._fallback(rnd, inbox)
                return
            round_var = 0

    def _fallback(self, rnd, inbox):
        survivors = sorted(self.T)
        ta, na = fallback_shape(len(survivors), len(self.S))
        units = sorted(self.S) + [None] * (na - len(self.S))
        pids = survivors + [None] * (ta - len(survivors))

        def unit_action(u, r):
            return Action(work=units[u - 1])

        sub = ABProcess(survivors.index(self.pid), na, ta, "a", pids=pids, clock=rnd - 1,
                        unit_action=unit_action)
        self.note(event="fallback", survivors=survivors, t_a=ta, n_a=na)
        while True:
            act = sub.step(rnd, inbox)
            self.mode = "fallback_active" if sub.mode == "active" else "fallback"
            if act.retire:
                self.S = set()
                yield act
                return
            rnd, inbox = yield act
