"""Protocol names, node factories and a one-call runner."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .adversary import NoCrashes, RandomAdversary
from .byzantine import BAConfig, BAProcess
from .engine import ConfigError, Engine, RunResult
from .oracle.checks import PROTOCOLS, Checker
from .protocols import ab, c as pc, d as pd
from .protocols.baselines import NaiveAllProcess, NaiveLeaderProcess


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    n: int
    t: int
    general_value: Any = 1

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}; choose from {', '.join(PROTOCOLS)}")
        if self.n < 1 or self.t < 1:
            raise ConfigError(f"need n >= 1 and t >= 1, got n={self.n}, t={self.t}")
        p = self.protocol
        if p in ("a", "b"):
            ab.check_shape(self.n, self.t)
        elif p in ("c", "c-batched"):
            pc.check_shape(self.n, self.t)
        elif p.startswith("ba-"):
            self.ba_config().validate()

    @property
    def procs(self) -> int:
        return self.n if self.protocol.startswith("ba-") else self.t

    def ba_config(self) -> BAConfig:
        return BAConfig(self.n, self.t, self.protocol[3:], self.general_value)

    def default_max_crashes(self) -> int:
        if self.protocol in ("a", "b", "c", "c-batched"):
            return self.t - 1
        return self.t

    def nodes(self) -> list:
        self.validate()
        n, t, p = self.n, self.t, self.protocol
        if p in ("a", "b"):
            return [ab.ABProcess(j, n, t, p) for j in range(t)]
        if p in ("c", "c-batched"):
            return [pc.CProcess(j, n, t, batched=p == "c-batched") for j in range(t)]
        if p == "d":
            return [pd.DProcess(j, n, t) for j in range(t)]
        if p == "naive-all":
            return [NaiveAllProcess(j, n, t) for j in range(t)]
        if p == "naive-leader":
            return [NaiveLeaderProcess(j, n, t) for j in range(t)]
        cfg = self.ba_config()
        return [BAProcess(j, cfg) for j in range(cfg.n_procs)]

    def checker(self, fail_fast: bool = False) -> Checker:
        return Checker(self.protocol, self.n, self.t, self.procs, fail_fast=fail_fast,
                       general_value=self.general_value)


def execute(cfg: RunConfig, adversary=None, *, check: bool = False, fail_fast: bool = False,
            fast_forward: bool = True):
    """Run one execution; returns (RunResult, Verdict or None)."""
    nodes = cfg.nodes()
    checker = cfg.checker(fail_fast) if check else None
    eng = Engine(
        nodes,
        adversary or NoCrashes(),
        units=range(1, cfg.n + 1),
        observers=[checker] if checker else [],
        fast_forward=fast_forward,
        protocol=cfg.protocol,
        n=cfg.n,
        t=cfg.t,
    )
    res: RunResult = eng.run()
    if cfg.protocol.startswith("ba-"):
        res.metrics.decisions = {nd.pid: nd.decision for nd in nodes if nd.pid not in eng.crashed}
    verdict = checker.finish(res.metrics) if checker else None
    return res, verdict


def random_adversary(cfg: RunConfig, seed: int, p: float, max_crashes: int | None = None) -> RandomAdversary:
    cap = cfg.default_max_crashes() if max_crashes is None else max_crashes
    return RandomAdversary(seed, p, cap)
