from crashwork.adversary import ScheduleAdversary
from crashwork.engine import CrashEvent
from crashwork.registry import RunConfig, execute


def crash(process, rnd, deliver_to=(), pre=False):
    return CrashEvent(process, rnd, frozenset(deliver_to), pre)


def run(protocol, n, t, *crashes, check=True):
    adv = ScheduleAdversary(crashes) if crashes else None
    return execute(RunConfig(protocol, n, t), adv, check=check)


def events(res, kind, **match):
    out = []
    for rec in res.trace.rounds:
        for ev in rec.events:
            if ev["type"] == kind and all(ev.get(k) == v for k, v in match.items()):
                out.append((rec.round, ev))
    return out
