import copy
import json

import pytest

from crashwork.engine import ConfigError, ExecutionTrace, RoundRecord
from crashwork.oracle.bounds import bound_for
from crashwork.oracle.checks import check_execution
from crashwork.oracle.enumerate import Space, SpaceTooLarge, certify, default_space, subsets
from crashwork.registry import RunConfig, execute

from helpers import crash, run


def test_bounds_examples():
    assert bound_for("a", 8, 4).to_json()["work_bound"] == 24
    a = bound_for("a", 8, 4)
    assert (a.work_bound, a.message_bound, a.round_bound) == (24, 72, 80)
    b = bound_for("b", 8, 4)
    assert (b.work_bound, b.message_bound, b.round_bound) == (24, 80, 56)
    c = bound_for("c", 4, 4)
    assert (c.work_bound, c.message_bound, c.round_bound) == (12, 68, 196608)
    d = bound_for("d", 8, 4, 1)
    assert (d.work_bound, d.message_bound, d.round_bound) == (16, 6 * 16, 2 * 2 + 6)


def test_bound_shape_errors():
    with pytest.raises(ConfigError):
        bound_for("a", 7, 4)
    with pytest.raises(ConfigError):
        bound_for("c", 4, 3)
    with pytest.raises(ConfigError):
        bound_for("nope", 4, 4)


def _a_trace():
    res, _ = execute(RunConfig("a", 8, 4))
    return res.trace


def test_clean_trace_passes():
    assert check_execution(_a_trace(), "a", {"n": 8, "t": 4}).passed


def test_two_actives_flagged():
    tr = copy.deepcopy(_a_trace())
    tr.rounds[1].events.append({"type": "mode", "process": 2, "from": "inactive", "to": "active"})
    verdict = check_execution(tr, "a", {"n": 8, "t": 4})
    assert "single-active" in {v.invariant for v in verdict.violations}


def test_excess_work_flagged():
    tr = copy.deepcopy(_a_trace())
    r = tr.rounds[-1].round
    for k in range(1, 26):
        tr.rounds.append(RoundRecord(r + k, [{"type": "work", "process": 0, "unit": 1}]))
    verdict = check_execution(tr, "a", {"n": 8, "t": 4})
    names = {v.invariant for v in verdict.violations}
    assert "work-bound" in names


def test_trace_protocol_mismatch():
    with pytest.raises(ValueError):
        check_execution(_a_trace(), "zzz", {"n": 8, "t": 4})


def test_stored_trace_roundtrip_checks():
    text = _a_trace().to_jsonl()
    tr = ExecutionTrace.from_jsonl(text, "a", 8, 4)
    assert check_execution(tr, "a", {"n": 8, "t": 4}).passed


def test_subset_families():
    assert len(subsets([1, 2], "prefix")) == 4
    assert subsets([1, 2, 3], "prefix") == [frozenset(), {1}, {1, 2}, {1, 2, 3}]
    assert len(subsets([1, 2, 3], "powerset")) == 8


def test_zero_candidate_rounds_gives_one_execution():
    rep = certify(Space("a", 4, 4, last_round=0))
    assert rep.executions == 1 and rep.ok


def test_single_process_crash_or_not():
    rep = certify(default_space("d", 2, 1))
    # d: one process, budget t=1: no crash, or a crash at either work round (pre or post)
    assert rep.ok
    assert rep.to_json()["executions_by_crash_count"]["0"] == 1
    rep = certify(default_space("naive-all", 2, 1, max_crashes=1))
    assert rep.executions == 1 + 2 * 2


def test_cap_refusal():
    with pytest.raises(SpaceTooLarge):
        certify(default_space("a", 4, 4, cap=10))


def test_enumeration_is_deterministic_and_finds_redundant_work():
    a = certify(default_space("a", 4, 4, stride=4)).to_json()
    b = certify(default_space("a", 4, 4, stride=4)).to_json()
    assert json.dumps(a) == json.dumps(b)
    assert a["pass"] and a["redundant_work_seen"]


def test_naive_baselines():
    res, v = run("naive-all", 8, 4)
    assert v.passed and (res.metrics.work_total, res.metrics.messages_total) == (32, 0)
    assert res.metrics.rounds_until_all_retired == 8
    res, v = run("naive-leader", 8, 4)
    assert v.passed and (res.metrics.work_total, res.metrics.messages_total) == (8, 8 * 3)


def test_naive_leader_successor_resumes():
    # leader checkpoints unit 1 at round 2, then dies before unit 2
    res, v = run("naive-leader", 8, 4, crash(0, 3, pre=True))
    assert v.passed and res.metrics.completed
    firsts = [ev["unit"] for rec in res.trace.rounds for ev in rec.events
              if ev["type"] == "work" and ev["process"] == 1]
    assert firsts[0] == 2
    assert res.metrics.work_total == 8
