import pytest

from crashwork.adversary import ScheduleAdversary
from crashwork.byzantine import BAConfig, adopt_value, ba_run, worker_count
from crashwork.engine import ConfigError, Envelope, ProtocolViolation
from crashwork.messages import Inform

from helpers import crash


def inform(v, sender=1):
    return Envelope(sender, 0, 1, Inform(v))


@pytest.mark.parametrize("engine", ["a", "b", "c"])
def test_correct_general_no_crashes(engine):
    res = ba_run(BAConfig(9, 3, engine, value=7))
    assert set(res.metrics.decisions.values()) == {7}
    assert len(res.metrics.decisions) == 9


@pytest.mark.parametrize("engine", ["a", "c"])
def test_silent_general_gives_default(engine):
    res = ba_run(BAConfig(9, 3, engine, value=7), ScheduleAdversary([crash(0, 1, pre=True)]))
    assert set(res.metrics.decisions.values()) == {0}
    assert 0 not in res.metrics.decisions


def test_general_reaches_one_sender():
    res = ba_run(BAConfig(9, 3, "a", value=7), ScheduleAdversary([crash(0, 1, deliver_to={2})]))
    assert len(set(res.metrics.decisions.values())) == 1


def test_worker_counts():
    assert worker_count("a", 3) == 4
    assert worker_count("a", 2) == 4
    assert worker_count("c", 3) == 4
    assert worker_count("c", 4) == 8


def test_too_few_processes():
    with pytest.raises(ConfigError):
        BAConfig(3, 3, "a").validate()


def test_adopt_value():
    assert adopt_value(0, [inform(5)]) == 5
    assert adopt_value(3, []) == 3
    assert adopt_value(0, [inform(5), inform(5, sender=2)]) == 5
    with pytest.raises(ProtocolViolation):
        adopt_value(0, [inform(5), inform(6, sender=2)])
