import asyncio
import io
from functools import partial
from logging import DEBUG, WARNING

import pytest

from dfplay.util import callback_failure, callback_result, echo, newLogger, P, set_verbosity, table
from dfplay.util.output import plain_text


@pytest.fixture
def lines():
    captured = []
    P.output_line = captured.append
    yield captured
    P.output_line = print


@pytest.fixture
def loop():
    loop = asyncio.new_event_loop()
    yield loop
    loop.close()


def test_callbacks_split_by_outcome(loop):
    seen = []
    on_result = callback_result(lambda value, **ctx: seen.append(("ok", value, ctx)))
    on_failure = callback_failure(lambda exc, **ctx: seen.append(("failed", str(exc), ctx)))

    good = loop.create_future()
    good.set_result(7)
    bad = loop.create_future()
    bad.set_exception(ValueError("boom"))
    cancelled = loop.create_future()
    cancelled.cancel()

    for future in (good, bad, cancelled):
        partial(on_result, index=1)(future)
        partial(on_failure, index=2)(future)

    assert seen == [("ok", 7, {"index": 1}), ("failed", "boom", {"index": 2})]


def test_verbosity_drops_low_priority_events(lines):
    set_verbosity(1)
    echo("done", "kept")
    echo("tab", "dropped")
    assert len(lines) == 1
    assert lines[0].endswith("kept")

    set_verbosity(2)
    echo("tab", "kept too")
    assert len(lines) == 2


def test_table_pads_keys_and_rounds_floats(lines):
    set_verbosity(2)
    table([("M", 2), ("d_star", 2.0000000001)])
    assert plain_text(lines[0]).endswith(" M       2")
    assert plain_text(lines[1]).endswith(" d_star  2")


def test_file_mirror_gets_every_event(lines):
    P.file = io.StringIO()
    try:
        echo("dbug", "quiet detail")
        assert not lines
        assert "dbug: quiet detail" in P.file.getvalue()
    finally:
        P.file = None


def test_loggers_follow_verbosity():
    log = newLogger("dfplay.test")
    assert log.level == WARNING
    set_verbosity(3)
    assert log.level == DEBUG
    set_verbosity(0)
    assert log.level == WARNING
