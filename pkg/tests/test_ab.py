from pathlib import Path

import pytest

from crashwork.engine import ConfigError, Envelope
from crashwork.messages import Full, GoAhead, Partial
from crashwork.protocols import ab
from crashwork.protocols.ab import FICTITIOUS, Resume, dowork_plan

from helpers import crash, events, run

GOLDEN = Path(__file__).parent / "golden" / "a_n8_t4.jsonl"


@pytest.mark.parametrize("i,t,g", [(0, 4, 1), (3, 4, 2), (15, 16, 4), (8, 9, 3)])
def test_group_of(i, t, g):
    assert ab.group_of(i, t) == g


@pytest.mark.parametrize("j,want", [(0, 0), (1, 20), (3, 60)])
def test_dd_a(j, want):
    assert ab.dd_a(j, 8, 4) == want


def test_pto_gto():
    assert ab.pto(8, 4) == 4
    assert ab.gto(0, 8, 4) == 15
    assert ab.gto(1, 8, 4) == 11


def test_dd_b_and_tt():
    assert ab.dd_b(1, 0, 8, 4) == 4
    assert ab.dd_b(2, 0, 8, 4) == 15
    assert ab.tt(1, 0, 8, 4) + ab.tt(3, 1, 8, 4) == ab.tt(3, 0, 8, 4) == 19


def test_dd_b_requires_order():
    with pytest.raises(ValueError):
        ab.dd_b(0, 1, 8, 4)


@pytest.mark.parametrize("n,t", [(7, 4), (8, 3), (0, 4)])
def test_shape_rejected(n, t):
    with pytest.raises(ConfigError):
        ab.check_shape(n, t)


def test_plan_from_scratch():
    plan = dowork_plan(FICTITIOUS, 8, 4, 0)
    work = [s.unit for s in plan if s.is_work]
    partials = [s for s in plan if isinstance(s.payload, Partial)]
    fulls = [s for s in plan if isinstance(s.payload, Full)]
    assert work == list(range(1, 9))
    assert len(partials) == 4
    assert {s.payload.c for s in fulls} == {2, 4}
    assert len(plan) == 16
    assert sum(len(s.recipients) for s in plan) == 10


def test_plan_resume_inside_group():
    plan = dowork_plan(Resume(2, 2, sender=0), 8, 4, 1)
    # (2,2) rebroadcast to the empty rest of group 1; no later groups for (2, 3)
    assert plan[0].payload == Full(2, 2) and plan[0].recipients == ()
    assert [s.unit for s in plan if s.is_work] == [5, 6, 7, 8]


def test_plan_resume_from_other_group():
    plan = dowork_plan(Resume(2, 2, sender=0), 8, 4, 2)
    assert plan[0].payload == Partial(2) and plan[0].recipients == (3,)
    assert [s.unit for s in plan if s.is_work] == [5, 6, 7, 8]


def test_plan_complete_resume_is_empty():
    assert dowork_plan(Resume(4), 8, 4, 3) == []


def test_a_passive_process_retires_on_last_subchunk():
    res, _ = run("a", 8, 4)
    retire = [r for r, ev in events(res, "retire", process=1)]
    got = [r for r, ev in events(res, "deliver", to=1) if ev["payload"] == {"kind": "partial", "c": 4}]
    assert retire == got == [15]
    assert not events(res, "work", process=1)


def test_a_takes_over_at_deadline():
    res, verdict = run("a", 8, 4, crash(0, 1, pre=True))
    assert verdict.passed
    acts = [(r, ev) for r, ev in events(res, "note", process=1) if ev.get("event") == "activate"]
    assert acts[0][0] == ab.dd_a(1, 8, 4)
    assert acts[0][1]["resume"][0] == 0


def test_b_same_group_takeover_after_pto():
    res, verdict = run("b", 8, 4, crash(0, 1, pre=True))
    assert verdict.passed
    first = events(res, "work", process=1)[0][0]
    assert first == ab.pto(8, 4)


def test_b_preactive_probe_when_group_silent():
    # 0 and 1 silent: 2 and 3 both reach DD_B(.,0) = GTO(0); 3 probes 2, 2 does the work
    res, verdict = run("b", 8, 4, crash(0, 1, pre=True), crash(1, 1))
    assert verdict.passed
    goes = events(res, "send", **{"from": 3, "to": 2})
    assert goes[0][0] == ab.gto(0, 8, 4) and goes[0][1]["payload"]["kind"] == "goahead"
    assert events(res, "work", process=2)[0][0] == ab.gto(0, 8, 4)
    assert not events(res, "work", process=3)


def test_b_go_ahead_activates_in_same_round():
    p = ab.ABProcess(2, 8, 4, "b")
    assert p.step(1, []).is_idle
    env = Envelope(3, 2, 4, GoAhead())
    act = p.step(5, [env])
    assert act.work == 1 and p.mode == "active"


def test_golden_trace_is_byte_exact():
    res, _ = run("a", 8, 4)
    assert res.trace.to_jsonl() == GOLDEN.read_text()


def test_golden_trace_matches_hand_trace():
    # process 0 alone, written out round by round from the DoWork code
    P, F = "partial", "full"
    hand = {
        1: ("work", 1), 2: ("work", 2), 3: (P, 1, (1,)),
        4: ("work", 3), 5: ("work", 4), 6: (P, 2, (1,)),
        7: (F, 2, (2, 3)), 8: (F, 2, (1,)),
        9: ("work", 5), 10: ("work", 6), 11: (P, 3, (1,)),
        12: ("work", 7), 13: ("work", 8), 14: (P, 4, (1,)),
        15: (F, 4, (2, 3)), 16: (F, 4, (1,)),
    }
    import json

    seen = {}
    retired = {}
    for line in GOLDEN.read_text().splitlines():
        rec = json.loads(line)
        for ev in rec["events"]:
            if ev["type"] == "work":
                assert ev["process"] == 0
                seen[rec["round"]] = ("work", ev["unit"])
            elif ev["type"] == "send":
                kind, c = ev["payload"]["kind"], ev["payload"]["c"]
                prev = seen.get(rec["round"], (kind, c, ()))
                seen[rec["round"]] = (kind, c, prev[2] + (ev["to"],))
            elif ev["type"] == "retire":
                retired[ev["process"]] = rec["round"]
    assert seen == hand
    assert retired == {0: 16, 1: 15, 2: 16, 3: 16}
