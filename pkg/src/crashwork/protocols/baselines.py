"""Two reference strategies used only for comparison."""

from __future__ import annotations

from ..engine import Action, ConfigError, Envelope, GeneratorNode, idle
from ..messages import Checkpoint


class NaiveAllProcess(GeneratorNode):
    """Every process performs every unit, silently."""

    def __init__(self, j: int, n: int, t: int):
        if n < 1 or t < 1:
            raise ConfigError("need n >= 1 and t >= 1")
        super().__init__(j)
        self.n = n

    def run(self):
        rnd, inbox = yield
        self.mode = "active"
        for u in range(1, self.n):
            rnd, inbox = yield Action(work=u)
        yield Action(work=self.n, retire=True)


class NaiveLeaderProcess(GeneratorNode):
    """Lowest surviving process works and checkpoints every unit to everyone.

    Process j takes over at round j(2n+1) from the unit after the last
    checkpoint it heard, unless it has already heard that unit n is done.
    """

    def __init__(self, j: int, n: int, t: int):
        if n < 1 or t < 1:
            raise ConfigError("need n >= 1 and t >= 1")
        super().__init__(j)
        self.n, self.t = n, t
        self.known = 0

    def run(self):
        rnd, inbox = yield
        start = max(1, self.pid * (2 * self.n + 1))
        while True:
            for env in inbox:
                if isinstance(env.payload, Checkpoint):
                    self.known = max(self.known, env.payload.unit)
            if self.known >= self.n:
                return
            if rnd >= start:
                break
            rnd, inbox = yield idle(wake=start)
        self.mode = "active"
        others = [p for p in range(self.t) if p != self.pid]
        for u in range(self.known + 1, self.n + 1):
            rnd, inbox = yield Action(work=u)
            sends = tuple(Envelope(self.pid, p, rnd, Checkpoint(u)) for p in others)
            if u == self.n:
                yield Action(sends=sends, retire=True)
                return
            rnd, inbox = yield Action(sends=sends)
