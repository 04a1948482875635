"""Exhaustive adversary enumeration for tiny instances.

The adversary space is explored adaptively.  Each execution is replayed from
scratch under a path of choices.  At every candidate round, each alive
process that acts that round is a branch point with options: no crash, a
pre-action crash (only when the action performs work), or a post-action
crash delivering to one subset of its recipients.  Crashing a process in a
round where it stays idle is indistinguishable from a pre-action crash at
its next acting round, so those rounds are not branched on.

Depth-first order over the choice tree gives a deterministic stream; the
``cap`` bounds the number of executions, and exceeding it raises
:class:`SpaceTooLarge` with the count reached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

from ..engine import ConfigError, CrashEvent, FOREVER, RoundContext
from .bounds import bound_for

SUBSET_POLICIES = ("prefix", "powerset")
DEFAULT_CAP = 10**6


class SpaceTooLarge(ConfigError):
    def __init__(self, reached: int, cap: int):
        super().__init__(f"adversary space has more than {cap} executions (reached {reached})")
        self.reached = reached
        self.cap = cap


@dataclass(frozen=True)
class Space:
    protocol: str
    n: int
    t: int
    stride: int = 1
    last_round: int | None = None
    subset_policy: str = "prefix"
    max_crashes: int | None = None
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.stride < 1:
            raise ConfigError("rounds stride must be >= 1")
        if self.subset_policy not in SUBSET_POLICIES:
            raise ConfigError(f"subset policy must be one of {SUBSET_POLICIES}")
        if self.cap < 1:
            raise ConfigError("cap must be >= 1")

    def candidate(self, rnd: int) -> bool:
        if self.last_round is not None and rnd > self.last_round:
            return False
        return (rnd - 1) % self.stride == 0

    def to_json(self) -> dict:
        return {
            "protocol": self.protocol,
            "n": self.n,
            "t": self.t,
            "candidate_rounds": {"first": 1, "last": self.last_round, "stride": self.stride},
            "subset_policy": self.subset_policy,
            "max_crashes": self.max_crashes,
            "cap": self.cap,
            "branching": "acting rounds only; pre-action crash only when the action performs work",
        }


def subsets(recipients: list[int], policy: str) -> list[frozenset]:
    rs = sorted(recipients)
    if policy == "powerset" or len(rs) <= 2:
        return [frozenset(c) for k in range(len(rs) + 1) for c in combinations(rs, k)]
    return [frozenset(rs[:k]) for k in range(len(rs) + 1)]


def crash_options(pid: int, rnd: int, action, policy: str) -> list[CrashEvent | None]:
    opts: list[CrashEvent | None] = [None]
    if action.work is not None:
        opts.append(CrashEvent(pid, rnd, frozenset(), True))
    recipients = sorted({e.recipient for e in action.sends})
    opts.extend(CrashEvent(pid, rnd, s, False) for s in subsets(recipients, policy))
    return opts


class ReplayAdversary:
    """Follows a choice path, extending it with option 0 past its end."""

    def __init__(self, space: Space, path: list[int], budget: int):
        self.space = space
        self.path = path
        self.pos = 0
        self.widths: list[int] = []
        self.budget = budget
        self.used = 0
        self.schedule: list[CrashEvent] = []

    def decide(self, ctx: RoundContext) -> list[CrashEvent]:
        if ctx.quiet or not self.space.candidate(ctx.round):
            return []
        out = []
        for pid in ctx.alive:
            if self.used >= self.budget:
                break
            act = ctx.proposals[pid]
            if act.is_idle:
                continue
            opts = crash_options(pid, ctx.round, act, self.space.subset_policy)
            choice = self.path[self.pos] if self.pos < len(self.path) else 0
            self.widths.append(len(opts))
            self.pos += 1
            ev = opts[choice]
            if ev is not None:
                out.append(ev)
                self.used += 1
        self.schedule.extend(out)
        return out

    def next_event_round(self, after: int) -> float:
        return FOREVER


def _next_path(path: list[int], widths: list[int]) -> list[int] | None:
    full = path + [0] * (len(widths) - len(path))
    for i in range(len(full) - 1, -1, -1):
        if full[i] + 1 < widths[i]:
            return full[:i] + [full[i] + 1]
    return None


@dataclass
class Outcome:
    index: int
    schedule: list[CrashEvent]
    result: object
    verdict: object


def enumerate_executions(space: Space) -> Iterator[Outcome]:
    """Deterministic stream of every execution in ``space``."""
    from ..registry import RunConfig, execute

    cfg = RunConfig(space.protocol, space.n, space.t)
    cfg.validate()
    budget = cfg.default_max_crashes() if space.max_crashes is None else space.max_crashes
    path: list[int] | None = []
    index = 0
    while path is not None:
        if index >= space.cap:
            raise SpaceTooLarge(index + 1, space.cap)
        adv = ReplayAdversary(space, path, budget)
        res, verdict = execute(cfg, adv, check=True)
        yield Outcome(index, list(adv.schedule), res, verdict)
        index += 1
        path = _next_path(path, adv.widths)


def default_space(protocol: str, n: int, t: int, **kw) -> Space:
    """Candidate rounds run up to the protocol's round bound."""
    from ..registry import RunConfig

    if kw.get("max_crashes") is None:
        kw["max_crashes"] = RunConfig(protocol, n, t).default_max_crashes()
    if "last_round" not in kw:
        kw["last_round"] = int(bound_for(protocol, n, t, t if protocol == "d" else None).round_bound)
    return Space(protocol, n, t, **kw)


@dataclass
class Report:
    space: Space
    executions: int = 0
    passed: int = 0
    first_violation: dict | None = None
    max_work: int = 0
    max_messages: int = 0
    max_rounds: int = 0
    redundant_work_seen: bool = False
    crash_counts: dict[int, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.passed == self.executions

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "executions": self.executions,
            "passed": self.passed,
            "pass": self.ok,
            "first_violation": self.first_violation,
            "max_work": self.max_work,
            "max_messages": self.max_messages,
            "max_rounds": self.max_rounds,
            "redundant_work_seen": self.redundant_work_seen,
            "executions_by_crash_count": {str(k): v for k, v in sorted(self.crash_counts.items())},
        }


def certify(space: Space) -> Report:
    rep = Report(space)
    for out in enumerate_executions(space):
        m = out.result.metrics
        rep.executions += 1
        rep.crash_counts[len(out.schedule)] = rep.crash_counts.get(len(out.schedule), 0) + 1
        if out.verdict.passed:
            rep.passed += 1
        elif rep.first_violation is None:
            rep.first_violation = {
                "index": out.index,
                "schedule": [ev.to_json() for ev in out.schedule],
                "violations": [v.to_json() for v in out.verdict.violations],
            }
        rep.max_work = max(rep.max_work, m.work_total)
        rep.max_messages = max(rep.max_messages, m.messages_total)
        rep.max_rounds = max(rep.max_rounds, m.rounds_until_all_retired)
        rep.redundant_work_seen |= m.work_total > space.n
    return rep
