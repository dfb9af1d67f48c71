from __future__ import annotations

import pytest

from mmabtk.arena import Emitter, Event, Handler
from mmabtk.exceptions import EventNotKnownError

PING: Event[[int], int] = Event("ping")
PONG: Event[[], None] = Event("pong")


def test_event_equality_is_by_name() -> None:
    assert Event("ping") == PING
    assert hash(Event("ping")) == hash(PING)
    assert PING != PONG


def test_emit_returns_the_results_of_the_callbacks_that_ran() -> None:
    emitter = Emitter(name="test")
    emitter.register(PING, lambda x: x * 2)
    emitter.register(PING, lambda x: x + 1, when=lambda x: x > 5)

    assert emitter.emit(PING, 3) == [6]
    assert emitter.emit(PING, 6) == [12, 7]
    assert emitter.event_counts[PING] == 2


def test_every_when_and_max_calls() -> None:
    emitter = Emitter()
    calls: dict[str, list[int]] = {"every": [], "when": [], "max": []}

    emitter.register(PING, calls["every"].append, every=3)
    emitter.register(PING, calls["when"].append, when=lambda i: i > 4)
    emitter.register(PING, calls["max"].append, max_calls=2)

    for i in range(1, 7):
        emitter.emit(PING, i)

    assert calls["every"] == [3, 6]
    assert calls["when"] == [5, 6]
    assert calls["max"] == [1, 2]


def test_handler_counts() -> None:
    handler: Handler[[int], int] = Handler(lambda x: x, every=2, max_calls=1)
    results = [handler(i) for i in range(6)]

    assert results == [None, 1, None, None, None, None]
    assert handler.seen == 6
    assert handler.calls == 1
    assert handler.exhausted


def test_subscriber() -> None:
    emitter = Emitter()
    subscribe = emitter.subscriber(PING)
    assert not subscribe.active

    seen: list[int] = []

    @subscribe(every=2)
    def on_ping(x: int) -> None:
        seen.append(x)

    assert subscribe.active
    for i in range(4):
        emitter.emit(PING, i)

    assert seen == [1, 3]
    assert subscribe.event_counts == 4

    # The decorator gives the function back
    on_ping(10)
    assert seen == [1, 3, 10]


def test_on_by_name() -> None:
    emitter = Emitter()
    emitter.subscriber(PONG)
    seen: list[str] = []

    emitter.on("pong")(lambda: seen.append("pong"))
    emitter.emit(PONG)
    assert seen == ["pong"]

    with pytest.raises(EventNotKnownError):
        emitter.on("nope")


@pytest.mark.parametrize("kwargs", [{"every": 0}, {"max_calls": -1}])
def test_invalid_handlers(kwargs: dict[str, int]) -> None:
    with pytest.raises(ValueError, match="must be"):
        Emitter().register(PING, print, **kwargs)
