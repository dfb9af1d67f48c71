"""Hooks into the episode loop.

An [`Arena`][mmabtk.arena.Arena] is an [`Emitter`][mmabtk.arena.events.Emitter]
of [`Event`][mmabtk.arena.events.Event]s. Handlers see the global state of the
simulation, such as every player's pull in a round, which policies never do.
This is how tests assert global properties of the protocols.

```python
from mmabtk.arena import Arena

arena = Arena(instance, policies)

@arena.on_round_resolved(every=100, when=lambda result, _: result.t > 1_000)
def check(result, policies) -> None:
    ...
```

A handler called with `every=n` only sees every `n`-th emission, and its `when`
predicate is given the same arguments as the handler itself.
"""
from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import partial
from typing import Generic, TypeVar, overload
from typing_extensions import ParamSpec

from more_itertools import first_true

from mmabtk.exceptions import EventNotKnownError

P = ParamSpec("P")
R = TypeVar("R")

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Event(Generic[P, R]):
    """An event an emitter can emit, identified by its name.

    Attributes:
        name: The name of the event.
    """

    name: str


@dataclass
class Handler(Generic[P, R]):
    """A callback for an event, and the conditions under which it is called.

    Attributes:
        callback: Called with the arguments of the emission.
        when: Called with the same arguments, the callback only runs if it is true.
        every: Only every `every`-th emission is considered.
        max_calls: The callback is not called more often than this.
        seen: The number of emissions this handler was given.
        calls: The number of times the callback ran.
    """

    callback: Callable[P, R]
    when: Callable[P, bool] | None = None
    every: int = 1
    max_calls: int | None = None
    seen: int = field(default=0, init=False)
    calls: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        if self.every < 1:
            raise ValueError(f"{self.every=} must be a positive integer.")
        if self.max_calls is not None and self.max_calls < 0:
            raise ValueError(f"{self.max_calls=} must be non-negative.")

    @property
    def exhausted(self) -> bool:
        """Whether the callback reached its `max_calls`."""
        return self.max_calls is not None and self.calls >= self.max_calls

    def __call__(self, *args: P.args, **kwargs: P.kwargs) -> R | None:
        """Call the callback if the conditions hold, else return `None`."""
        self.seen += 1
        if self.seen % self.every != 0 or self.exhausted:
            return None

        if self.when is not None and not self.when(*args, **kwargs):
            return None

        self.calls += 1
        return self.callback(*args, **kwargs)


@dataclass
class Subscriber(Generic[P, R]):
    """Subscribe to one event of an emitter, directly or as a decorator.

    ```python
    subscribe = emitter.subscriber(ROUND_RESOLVED)

    @subscribe(every=10)
    def callback(result, policies) -> None:
        ...
    ```
    """

    emitter: Emitter
    event: Event[P, R]

    @property
    def active(self) -> bool:
        """Whether any handler listens to the event."""
        return bool(self.emitter.handlers.get(self.event))

    @property
    def event_counts(self) -> int:
        """The number of times the event was emitted."""
        return self.emitter.event_counts[self.event]

    @overload
    def __call__(
        self,
        callback: None = None,
        *,
        when: Callable[P, bool] | None = ...,
        every: int = ...,
        max_calls: int | None = ...,
    ) -> Callable[[Callable[P, R]], Callable[P, R]]:
        ...

    @overload
    def __call__(
        self,
        callback: Callable[P, R],
        *,
        when: Callable[P, bool] | None = ...,
        every: int = ...,
        max_calls: int | None = ...,
    ) -> Callable[P, R]:
        ...

    def __call__(
        self,
        callback: Callable[P, R] | None = None,
        *,
        when: Callable[P, bool] | None = None,
        every: int = 1,
        max_calls: int | None = None,
    ) -> Callable[P, R] | Callable[[Callable[P, R]], Callable[P, R]]:
        """Register a callback, or return a decorator if none is given.

        Args:
            callback: The callback to register.
            when: A predicate over the emitted arguments.
            every: Only consider every `every`-th emission.
            max_calls: The maximum number of times the callback is called.

        Returns:
            The callback itself, so it can still be called directly.
        """
        register = partial(
            self.emitter.register,
            self.event,
            when=when,
            every=every,
            max_calls=max_calls,
        )
        if callback is None:
            return register
        return register(callback)


class Emitter:
    """Calls the registered handlers of an event when it is emitted.

    Attributes:
        name: The name of the emitter, used in logging.
        handlers: The handlers of each event, in registration order.
        event_counts: The number of emissions of each event.
    """

    def __init__(self, name: str | None = None) -> None:
        """Initialise the emitter.

        Args:
            name: The name of the emitter.
        """
        super().__init__()
        self.name = name
        self.handlers: dict[Event, list[Handler]] = {}
        self.event_counts: Counter[Event] = Counter()

    def subscriber(self, event: Event[P, R]) -> Subscriber[P, R]:
        """Declare an event of this emitter and give access to subscribe to it."""
        self.handlers.setdefault(event, [])
        return Subscriber(self, event)

    def emit(self, event: Event[P, R], *args: P.args, **kwargs: P.kwargs) -> list[R]:
        """Emit an event.

        Args:
            event: The event to emit.
            *args: Passed on to the handlers.
            **kwargs: Passed on to the handlers.

        Returns:
            The results of the callbacks that ran.
        """
        self.event_counts[event] += 1
        results = []
        for handler in self.handlers.get(event, []):
            calls = handler.calls
            result = handler(*args, **kwargs)
            if handler.calls > calls:
                results.append(result)
        return results

    def register(
        self,
        event: Event[P, R] | str,
        callback: Callable[P, R],
        *,
        when: Callable[P, bool] | None = None,
        every: int = 1,
        max_calls: int | None = None,
    ) -> Callable[P, R]:
        """Register a callback for an event.

        Args:
            event: The event, or its name.
            callback: The callback to register.
            when: A predicate over the emitted arguments.
            every: Only consider every `every`-th emission.
            max_calls: The maximum number of times the callback is called.

        Returns:
            The callback.
        """
        event = self.lookup(event)
        handler = Handler(callback, when=when, every=every, max_calls=max_calls)
        self.handlers.setdefault(event, []).append(handler)

        name = getattr(callback, "__qualname__", repr(callback))
        logger.debug(f"{self.name}: {name} handles {event.name!r} every {every}")
        return callback

    def on(
        self,
        event: Event[P, R] | str,
        *,
        when: Callable[P, bool] | None = None,
        every: int = 1,
        max_calls: int | None = None,
    ) -> Callable[[Callable[P, R]], Callable[P, R]]:
        """A decorator registering a callback for an event given by name or value."""
        return partial(
            self.register,
            self.lookup(event),
            when=when,
            every=every,
            max_calls=max_calls,
        )

    def lookup(self, event: Event[P, R] | str) -> Event[P, R]:
        """The event of this emitter with the given name.

        Raises:
            EventNotKnownError: If no event of this name was declared.
        """
        if isinstance(event, Event):
            return event

        known = first_true(self.handlers, None, lambda e: e.name == event)
        if known is None:
            raise EventNotKnownError(
                f"{event!r} is not an event of {self.name},"
                f" known events are {[e.name for e in self.handlers]}",
            )
        return known
