import pytest

from logger import LEVELS, logger, quiesce_logger, routed_to, set_logger_verbosity


@pytest.fixture
def captured():
    set_logger_verbosity(0)
    quiesce_logger(0)
    sinks = {group: [] for group in ("cube", "input", "notice", "plain")}
    handlers = [logger.add(sinks[group].append, format="{message}", filter=routed_to(group)) for group in sinks]
    yield sinks
    for handler in handlers:
        logger.remove(handler)
    quiesce_logger(0)


def names(messages):
    return [m.record["level"].name for m in messages]


def test_every_level_has_an_accessor():
    for name in LEVELS:
        assert callable(getattr(logger, name.lower()))


def test_levels_reach_their_own_sink(captured):
    logger.complex("CKh: 1 crossings")
    logger.verify("doubling holds")
    logger.input_ok("Diagram", status="OK")
    logger.message("Report written")
    logger.info("plain line")
    assert names(captured["cube"]) == ["COMPLEX", "VERIFY"]
    assert names(captured["input"]) == ["INPUT_OK"]
    assert captured["input"][0].record["extra"]["status"] == "OK"
    assert names(captured["notice"]) == ["MESSAGE"]
    assert names(captured["plain"]) == ["INFO"]


def test_quiesce_keeps_notices(captured):
    quiesce_logger(2)
    logger.complex("hidden")
    logger.input("Diagram", status="Parsing")
    logger.message("still shown")
    assert captured["cube"] == [] and captured["input"] == []
    assert names(captured["notice"]) == ["MESSAGE"]
