"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
All comparisons are exact; no tolerances.
"""

import math
import sys
import time
from pathlib import Path

import pytest

from crashwork.adversary import RandomAdversary
from crashwork.oracle.bounds import d_failure_free
from crashwork.oracle.enumerate import certify, default_space
from crashwork.protocols.ab import dd_b, group_of, tt
from crashwork.protocols.c import k_constant
from crashwork.registry import RunConfig, execute

GOLDEN = Path(__file__).parent / "golden" / "a_n8_t4.jsonl"
PROBS = (0.01, 0.05, 0.2)


def sweep(protocol, n, t, seeds, probs=PROBS, max_crashes=None):
    """Yield (seed, p, result, verdict) for every checked random run."""
    cfg = RunConfig(protocol, n, t)
    cap = cfg.default_max_crashes() if max_crashes is None else max_crashes
    for p in probs:
        for seed in seeds:
            res, verdict = execute(cfg, RandomAdversary(seed, p, cap), check=True)
            yield seed, p, res, verdict


def bounded_sweep(protocol, n, t, seeds, work, msgs, rounds, must_hold=()):
    runs, worst = 0, [0, 0, 0]
    for seed, p, res, verdict in sweep(protocol, n, t, seeds):
        runs += 1
        m = res.metrics
        got = (m.work_total, m.messages_total, m.rounds_until_all_retired)
        worst = [max(a, b) for a, b in zip(worst, got)]
        survivors = t - m.failures_injected
        if survivors >= 1 and not m.completed:
            return False, f"seed {seed} p={p}: incomplete with {survivors} survivors"
        if got[0] > work or got[1] > msgs or got[2] > rounds:
            return False, f"seed {seed} p={p}: {got} exceeds ({work}, {msgs}, {rounds})"
        if not verdict.passed:
            return False, f"seed {seed} p={p}: {verdict.violations[0]}"
    detail = f"{runs} runs; max work {worst[0]} <= {work}, messages {worst[1]} <= {msgs}, rounds {worst[2]} <= {rounds}"
    if must_hold:
        detail += f"; invariants {', '.join(must_hold)} checked every round"
    return True, detail


def criterion_1():
    return bounded_sweep("a", 8, 4, range(1000), 24, 72, 80)


def criterion_2():
    res, verdict = execute(RunConfig("a", 8, 4), check=True)
    m = res.metrics
    got = (m.work_total, m.messages_total, m.rounds_until_all_retired)
    if got != (8, 10, 16) or not verdict.passed:
        return False, f"metrics {got}"
    if res.trace.to_jsonl() != GOLDEN.read_text():
        return False, "trace differs from the committed golden trace"
    return True, "work 8, messages 10, rounds 16; trace byte-identical to golden"


def criterion_3():
    return bounded_sweep("b", 8, 4, range(1000), 24, 80, 56, ("single-active", "monotone-takeover"))


def criterion_4():
    checked = 0
    for t in (4, 16):
        for n in (t, 4 * t):
            for k in range(t):
                for j in range(k + 1, t):
                    for l in range(j + 1, t):
                        checked += 1
                        if tt(j, k, n, t) + tt(l, j, n, t) != tt(l, k, n, t):
                            return False, f"TT fails at t={t} n={n} ({k},{j},{l})"
                        if group_of(j, t) < group_of(l, t) and tt(j, k, n, t) + dd_b(l, j, n, t) != dd_b(l, k, n, t):
                            return False, f"DD_B fails at t={t} n={n} ({k},{j},{l})"
    return True, f"{checked} triples exact"


def criterion_5():
    start = time.perf_counter()
    ok, detail = bounded_sweep("c", 4, 4, range(500), 12, 68, 196608, ("single-active", "knowledge-dominance"))
    took = time.perf_counter() - start
    if ok and took > 60:
        return False, f"{detail}; took {took:.1f}s > 60s"
    return ok, f"{detail}; {took:.1f}s"


def criterion_6():
    t = 4
    cap = t * k_constant(4, t, batched=True) * (4 + t) * 2 ** (4 + t)
    worst = 0
    for seed, p, res, verdict in sweep("c-batched", 4, t, range(500)):
        worst = max(worst, res.metrics.rounds_until_all_retired)
        if res.metrics.rounds_until_all_retired > cap or not verdict.passed:
            return False, f"seed {seed} p={p}: rounds {res.metrics.rounds_until_all_retired}, {verdict.to_json()}"
    counts = [execute(RunConfig("c-batched", n, t))[0].metrics.messages["ordinary"] for n in (8, 128)]
    if counts[0] != counts[1]:
        return False, f"ordinary messages {counts} differ between n=8 and n=128"
    return True, f"max rounds {worst} <= {cap}; ordinary messages {counts[0]} at n=8 and n=128"


def _fallback(res):
    return any(ev.get("event") == "fallback" for rec in res.trace.rounds for ev in rec.events)


def criterion_7():
    n, t = 8, 4
    res, verdict = execute(RunConfig("d", n, t), check=True)
    m = res.metrics
    if (m.rounds_until_all_retired, m.work_total) != (4, 8) or m.messages_total > d_failure_free(n, t).message_bound:
        return False, f"failure-free {m.to_json()}"
    ff_msgs = m.messages_total
    normal = fallback = 0
    for seed, p, res, verdict in sweep("d", n, t, range(1000)):
        m, f = res.metrics, res.metrics.failures_injected
        if _fallback(res):
            fallback += 1
            if m.work_total > 4 * n:
                return False, f"seed {seed} p={p}: fallback work {m.work_total} > {4 * n}"
        else:
            normal += 1
            got = (m.work_total, m.messages_total, m.rounds_until_all_retired)
            cap = (2 * n, (4 * f + 2) * t * t, (f + 1) * n // t + 4 * f + 2)
            if any(g > c for g, c in zip(got, cap)):
                return False, f"seed {seed} p={p}: {got} exceeds {cap} with f={f}"
        if not verdict.passed:
            return False, f"seed {seed} p={p}: {verdict.violations[0]}"
    return True, f"failure-free 4 rounds, 8 work, {ff_msgs} <= 32 messages; {normal} halving runs and {fallback} fallback runs within bounds"


def criterion_8():
    runs, worst = 0, {}
    for engine in ("a", "c"):
        for t, n_procs in ((2, 6), (2, 9), (3, 6), (3, 9)):
            cfg = RunConfig(f"ba-{engine}", n_procs, t, general_value=1)
            cap = n_procs + 9 * (t + 1) * math.sqrt(t + 1) + t
            for seed in range(1000):
                p = PROBS[seed % 3]
                res, verdict = execute(cfg, RandomAdversary(seed, p, t), check=True)
                runs += 1
                bad = [v for v in verdict.violations if v.invariant in ("agreement", "validity")]
                if bad or not verdict.passed:
                    return False, f"{cfg}: seed {seed}: {verdict.violations[0]}"
                if engine == "a":
                    key = (t, n_procs)
                    worst[key] = max(worst.get(key, 0), res.metrics.messages_total)
                    if res.metrics.messages_total > cap:
                        return False, f"{cfg}: seed {seed}: {res.metrics.messages_total} messages > {cap:.2f}"
    caps = ", ".join(f"t={t} n={n}: {w}" for (t, n), w in sorted(worst.items()))
    return True, f"{runs} runs agree and are valid; engine A max messages {caps}"


def criterion_9():
    start = time.perf_counter()
    parts = []
    for protocol, n, t in (("a", 4, 4), ("b", 4, 4), ("c", 2, 2), ("d", 4, 2)):
        rep = certify(default_space(protocol, n, t))
        if not rep.ok:
            return False, f"{protocol} n={n} t={t}: {rep.first_violation}"
        parts.append(f"{protocol}({n},{t}) {rep.executions}")
        if protocol == "a" and not rep.redundant_work_seen:
            return False, "no A execution with redundant work"
    took = time.perf_counter() - start
    if took > 300:
        return False, f"took {took:.0f}s > 300s"
    return True, f"all executions pass: {', '.join(parts)}; {took:.1f}s"


def criterion_10():
    n, t = 64, 16
    a = execute(RunConfig("a", n, t))[0].metrics
    na = execute(RunConfig("naive-all", n, t))[0].metrics
    nl = execute(RunConfig("naive-leader", n, t))[0].metrics
    ok = a.effort < na.effort and a.messages_total < nl.messages_total
    return ok, f"effort A {a.effort} vs naive-all {na.effort}; messages A {a.messages_total} vs naive-leader {nl.messages_total}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _report(k, ok, detail):
    return f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + _report(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        failed += not ok
        print(_report(k, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
