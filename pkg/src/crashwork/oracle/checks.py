"""Invariant checking over execution traces.

A :class:`Checker` consumes round records one at a time, so the same code
runs as a live engine observer (aborting at the first violation) and as an
offline pass over a stored trace.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from ..engine import (
    MESSAGE_KINDS,
    ExecutionTrace,
    InvariantViolation,
    Metrics,
    RoundRecord,
    Violation,
)
from ..byzantine import worker_count
from .bounds import bound_for, d_failure_free, d_one_failure

KIND_OF_WIRE = {
    "partial": "ordinary",
    "full": "ordinary",
    "goahead": "go_ahead",
    "poll": "poll",
    "poll_reply": "poll_reply",
    "ordinary_c": "ordinary",
    "view_d": "view_d",
    "inform": "inform",
    "checkpoint": "ordinary",
}

PROTOCOLS = ("a", "b", "c", "c-batched", "d", "ba-a", "ba-b", "ba-c", "naive-all", "naive-leader")


@dataclass
class Verdict:
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"pass": self.passed, "violations": [v.to_json() for v in self.violations]}


class Checker:
    """Round-by-round invariant checker for one execution."""

    def __init__(self, protocol: str, n: int, t: int, procs: int | None = None, *,
                 fail_fast: bool = False, general_value=1):
        if protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {protocol!r}")
        self.protocol, self.n, self.t = protocol, n, t
        self.procs = procs if procs is not None else t
        self.fail_fast = fail_fast
        self.general_value = general_value
        self.violations: list[Violation] = []
        self.last_round = 0
        self.mode: dict[int, str] = {p: "inactive" for p in range(self.procs)}
        self.gone: set[int] = set()
        self.crashed: set[int] = set()
        self.prev_sends: Counter = Counter()
        self.prev_round = -1
        # metrics recomputed from the trace
        self.work = Counter()
        self.messages = Counter({k: 0 for k in MESSAGE_KINDS})
        self.rounds = 0
        # protocol state
        self.activations: list[int] = []
        self.go_aheads: Counter = Counter()
        self.knowledge: dict[int, dict] = {}
        self.phase_ends: dict[int, list[tuple[int, int, list, list]]] = {}
        self.fallback = False
        self.decisions: dict[int, object] = {}
        self.values: dict[int, object] = {}
        self.informed: set[int] = set()
        self.value_snapshots: list[tuple[int, dict]] = []
        self.polls_prev: set[tuple[int, int]] = set()
        self.pollers_prev: set[int] = set()

    # -- plumbing -----------------------------------------------------------
    def _fail(self, rnd: int, name: str, detail: str) -> None:
        v = Violation(rnd, name, detail)
        self.violations.append(v)
        if self.fail_fast:
            raise InvariantViolation(v)

    def __call__(self, record: RoundRecord, engine=None) -> None:
        self.feed(record)

    def feed(self, record: RoundRecord) -> None:
        rnd = record.round
        if self.prev_round != rnd - 1:
            self.polls_prev, self.pollers_prev = set(), set()
        if rnd <= self.last_round:
            self._fail(rnd, "round-order", f"round {rnd} after round {self.last_round}")
        self.last_round = rnd
        prev = self.prev_sends if self.prev_round == rnd - 1 else Counter()
        sends_now: Counter = Counter()
        acting: set[int] = set()
        polls_now: set[tuple[int, int]] = set()
        pollers_now: set[int] = set()
        delivered: list[dict] = []

        for ev in record.events:
            typ = ev["type"]
            actor = ev.get("process", ev.get("from"))
            if typ in ("work", "send", "note", "mode", "state", "retire") and actor in self.gone:
                self._fail(rnd, "crash-permanence", f"process {actor} acts after retiring ({typ})")
            if typ in ("deliver", "drop"):
                key = (ev["from"], ev["to"], ev["sent"], _freeze(ev["payload"]))
                if ev["sent"] != rnd - 1 or prev[key] <= 0:
                    self._fail(rnd, "causality", f"{typ} of a message not sent in round {rnd - 1}: {ev}")
                else:
                    prev[key] -= 1
                if typ == "deliver":
                    delivered.append(ev)
                    if ev["to"] in self.gone:
                        self._fail(rnd, "delivery", f"delivered to retired process {ev['to']}")
            elif typ == "send":
                key = (ev["from"], ev["to"], ev["sent"], _freeze(ev["payload"]))
                sends_now[key] += 1
                kind = KIND_OF_WIRE.get(ev["payload"]["kind"])
                if kind is None:
                    self._fail(rnd, "payload", f"unknown payload {ev['payload']}")
                else:
                    self.messages[kind] += 1
                if ev["from"] == ev["to"]:
                    self._fail(rnd, "self-message", str(ev))
                acting.add(ev["from"])
                if ev["payload"]["kind"] == "goahead":
                    self.go_aheads[ev["from"]] += 1
                if ev["payload"]["kind"] == "poll":
                    polls_now.add((ev["from"], ev["to"]))
                    pollers_now.add(ev["from"])
                if ev["payload"]["kind"] == "poll_reply" and (ev["to"], ev["from"]) not in self.polls_prev:
                    self._fail(rnd, "poll-discipline", f"reply {ev['from']}->{ev['to']} without a poll one round earlier")
            elif typ == "work":
                self.work[ev["unit"]] += 1
                acting.add(ev["process"])
            elif typ == "crash":
                self.gone.add(ev["process"])
                self.crashed.add(ev["process"])
                self.rounds = rnd
            elif typ == "retire":
                self.gone.add(ev["process"])
                self.rounds = rnd
            elif typ == "mode":
                self.mode[ev["process"]] = ev["to"]
                if ev["to"] in ("active",):
                    self.activations.append(ev["process"])
            elif typ == "state":
                self.knowledge[ev["process"]] = ev["state"]
                if "value" in ev["state"]:
                    self.values[ev["process"]] = ev["state"]["value"]
            elif typ == "note":
                self._note(rnd, ev)

        if self.protocol in ("c", "c-batched", "ba-c"):
            for p in self.pollers_prev:
                if p in acting and p not in self.gone:
                    # the poller may only answer polls in the round after polling
                    own = [e for e in record.events
                           if e.get("process", e.get("from")) == p and e["type"] in ("work", "send")
                           and not (e["type"] == "send" and e["payload"]["kind"] == "poll_reply")]
                    if own:
                        self._fail(rnd, "poll-discipline", f"process {p} acted in the round after polling")
        self.polls_prev, self.pollers_prev = polls_now, pollers_now
        self.prev_sends, self.prev_round = sends_now, rnd

        for ev in delivered:
            if self.protocol.startswith("ba-") and ev["payload"]["kind"] in ("inform", "ordinary_c"):
                if ev["sent"] >= 2 and "value" in ev["payload"]:
                    self.informed.add(ev["to"])
        self._per_round(rnd)

    def _note(self, rnd: int, ev: dict) -> None:
        if ev.get("event") == "phase_end":
            self.phase_ends.setdefault(ev["phase"], []).append((rnd, ev["process"], ev["S"], ev["T"]))
            if ev.get("fallback"):
                self.fallback = True
        elif ev.get("event") == "decide":
            self.decisions[ev["process"]] = ev["value"]

    # -- per-round invariants --------------------------------------------------
    def _per_round(self, rnd: int) -> None:
        live = [p for p in range(self.procs) if p not in self.gone]
        proto = self.protocol
        if proto in ("a", "b", "c", "c-batched", "ba-a", "ba-b", "ba-c"):
            active = [p for p in live if self.mode.get(p) == "active"]
            if len(active) > 1:
                self._fail(rnd, "single-active", f"processes {active} active together")
        if proto in ("a", "b", "ba-a", "ba-b"):
            acts = self.activations
            if len(acts) >= 2 and acts[-1] <= acts[-2]:
                self._fail(rnd, "monotone-takeover", f"activation order {acts}")
                self.activations = acts[-1:]
        if proto in ("b", "ba-b"):
            workers = self.t if proto == "b" else worker_count("b", self.t)
            cap = math.isqrt(workers) - 1
            for p, k in self.go_aheads.items():
                if k > cap:
                    self._fail(rnd, "go-ahead-count", f"process {p} sent {k} go-aheads (cap {cap})")
                    self.go_aheads[p] = -(10**9)
        if proto in ("c", "c-batched", "ba-c"):
            self._check_c(rnd, live)
        if proto == "d":
            fa = [p for p in live if self.mode.get(p) == "fallback_active"]
            if len(fa) > 1:
                self._fail(rnd, "single-active", f"fallback processes {fa} active together")
        if proto.startswith("ba-") and self.values:
            snap = {p: self.values[p] for p in live if p in self.informed and p in self.values}
            if len(set(map(_freeze_value, snap.values()))) > 1:
                self.value_snapshots.append((rnd, snap))

    def _check_c(self, rnd: int, live: list[int]) -> None:
        know = {p: k for p, k in ((p, self.knowledge.get(p)) for p in live)
                if k is not None and "m" in k and not k.get("listening")}
        active = [p for p in live if self.mode.get(p) == "active"]
        for a in active:
            if a not in know:
                continue
            ma = know[a]["m"]
            for p, k in know.items():
                if k["m"] > ma:
                    self._fail(rnd, "knowledge-dominance",
                               f"active {a} has reduced view {ma} < {k['m']} of process {p}")
        idle = [p for p, k in know.items() if not k["ever_active"] and k["m"] >= 1 and p not in active]
        for x in range(len(idle)):
            for y in range(x + 1, len(idle)):
                a, b = know[idle[x]], know[idle[y]]
                ab, ba = _dominates(a, b), _dominates(b, a)
                if not (ab or ba):
                    self._fail(rnd, "comparability", f"views of {idle[x]} and {idle[y]} are incomparable")
                elif ab and not ba and a["m"] < b["m"] or ba and not ab and b["m"] < a["m"]:
                    self._fail(rnd, "comparability",
                               f"dominance of {idle[x]}/{idle[y]} disagrees with reduced views")

    # -- end of run ----------------------------------------------------------------
    def trace_metrics(self) -> Metrics:
        m = Metrics()
        m.work_total = sum(self.work.values())
        m.work_redundant = sum(k - 1 for k in self.work.values() if k > 1)
        m.messages = {k: self.messages[k] for k in MESSAGE_KINDS}
        m.rounds_until_all_retired = self.rounds
        units = self._units()
        m.completed = all(self.work[u] > 0 for u in units)
        m.failures_injected = len(self.crashed)
        return m

    def _units(self) -> Iterable[int]:
        return range(1, self.n + 1)

    def finish(self, metrics: Metrics | None = None) -> Verdict:
        tm = self.trace_metrics()
        if metrics is not None:
            for name in ("work_total", "work_redundant", "rounds_until_all_retired", "completed",
                         "failures_injected"):
                if getattr(metrics, name) != getattr(tm, name):
                    self._fail(self.last_round, "metrics-consistency",
                               f"{name}: engine {getattr(metrics, name)} vs trace {getattr(tm, name)}")
            if metrics.messages != tm.messages:
                self._fail(self.last_round, "metrics-consistency", f"messages {metrics.messages} vs {tm.messages}")
        m = metrics or tm
        if m.completed and m.work_total != self.n + m.work_redundant:
            self._fail(self.last_round, "work-accounting", "work_total != n + work_redundant")
        survivors = self.procs - len(self.crashed)
        if survivors >= 1 and not m.completed:
            self._fail(self.last_round, "completion", f"{survivors} survivor(s) but work incomplete")
        self._bounds(m)
        if self.protocol == "d":
            self._finish_d(m)
        if self.protocol.startswith("ba-"):
            self._finish_ba()
        return Verdict(list(self.violations))

    def _bounds(self, m: Metrics) -> None:
        proto = self.protocol
        if proto.startswith("ba-"):
            rec = bound_for(proto, self.n, self.t)
        else:
            rec = bound_for(proto, self.n, self.t, m.failures_injected, fallback=self.fallback)
        checks = (("work-bound", m.work_total, rec.work_bound),
                  ("message-bound", m.messages_total, rec.message_bound),
                  ("round-bound", m.rounds_until_all_retired, rec.round_bound))
        for name, got, cap in checks:
            if got > cap:
                self._fail(self.last_round, name, f"{got} > {cap}")

    def _finish_d(self, m: Metrics) -> None:
        n, t = self.n, self.t
        prev_s, prev_t = n, t
        for phase, ends in sorted(self.phase_ends.items()):
            views = {(tuple(S), tuple(T)) for _, p, S, T in ends if p not in self.crashed}
            if len(views) > 1:
                self._fail(ends[0][0], "phase-agreement", f"phase {phase} final views differ: {sorted(views)}")
            rounds = [r for r, p, _, _ in ends if p not in self.crashed]
            if rounds and max(rounds) - min(rounds) > 1:
                self._fail(max(rounds), "straggler", f"phase {phase} ended over rounds {sorted(set(rounds))}")
            live = [(len(S), len(T)) for _, p, S, T in ends if p not in self.crashed]
            if not self.fallback and live:
                # at most half of T fail, each stranding one allotment; n/2^k when divisions are exact
                cap = (prev_t // 2) * -(-prev_s // prev_t)
                left = max(s for s, _ in live)
                if left > cap:
                    self._fail(ends[0][0], "work-halving", f"{left} units left after phase {phase}, cap {cap}")
                prev_s, prev_t = live[0]
        f = m.failures_injected
        if f == 0:
            rec = d_failure_free(n, t)
            if m.rounds_until_all_retired != -(-n // t) + 2:
                self._fail(self.last_round, "failure-free-rounds", f"{m.rounds_until_all_retired} rounds")
            if m.work_total != n:
                self._fail(self.last_round, "failure-free-work", f"work {m.work_total}")
            if m.messages_total > rec.message_bound:
                self._fail(self.last_round, "failure-free-messages", f"{m.messages_total} messages")
        elif f == 1 and t >= 2 and not self.fallback:
            rec = d_one_failure(n, t)
            if m.rounds_until_all_retired > rec.round_bound:
                self._fail(self.last_round, "one-failure-rounds", f"{m.rounds_until_all_retired} > {rec.round_bound}")
            if m.messages_total > rec.message_bound:
                self._fail(self.last_round, "one-failure-messages", f"{m.messages_total} > {rec.message_bound}")
            if m.work_total > n + -(-n // t):
                self._fail(self.last_round, "one-failure-work", f"{m.work_total} > {n} + ceil({n}/{t})")

    def _finish_ba(self) -> None:
        deciders = {p: v for p, v in self.decisions.items() if p not in self.crashed}
        if len(set(map(_freeze_value, deciders.values()))) > 1:
            self._fail(self.last_round, "agreement", f"decisions {deciders}")
        if 0 not in self.crashed:
            wrong = {p: v for p, v in deciders.items() if v != self.general_value}
            if wrong:
                self._fail(self.last_round, "validity", f"general correct but {wrong}")
        for rnd, snap in self.value_snapshots:
            correct = {p: v for p, v in snap.items() if p not in self.crashed}
            if len(set(map(_freeze_value, correct.values()))) > 1:
                self._fail(rnd, "no-mixed-round", f"informed correct processes hold {correct}")
                break


def _dominates(a: dict, b: dict) -> bool:
    if not set(b["F"]) <= set(a["F"]):
        return False
    if a["round0"] < b["round0"]:
        return False
    return all(a["round"][k] >= b["round"][k] for k in a["round"])


def _freeze(payload):
    if isinstance(payload, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in payload.items()))
    if isinstance(payload, list):
        return tuple(_freeze(v) for v in payload)
    return payload


def _freeze_value(v):
    return _freeze(v)


def check_execution(trace: ExecutionTrace, protocol: str, params: dict | None = None) -> Verdict:
    """Re-check a stored trace from its events alone."""
    params = dict(params or {})
    if trace.protocol and trace.protocol != protocol:
        raise ValueError(f"trace is for protocol {trace.protocol!r}, not {protocol!r}")
    n = params.get("n", trace.n)
    t = params.get("t", trace.t)
    procs = params.get("procs", trace.procs)
    chk = Checker(protocol, n, t, procs, general_value=params.get("general_value", 1))
    for rec in trace.rounds:
        chk.feed(rec)
    return chk.finish()
