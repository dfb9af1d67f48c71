"""The exceptions raised by the simulator, the policies and the harness."""
from __future__ import annotations

from typing import Any


class ConfigurationError(ValueError):
    """Raised when an instance, an experiment config or a pull is invalid.

    This covers arm indices out of range, entry times outside the horizon,
    unknown config keys and policies given parameters they can not use.
    """


class UnknownPolicyError(ConfigurationError):
    """Raised when no policy is registered under a name."""

    def __init__(self, name: str, known: Any) -> None:
        """Initialize the exception.

        Args:
            name: The name that was looked up.
            known: The names which are registered.
        """
        super().__init__(f"No policy registered as {name!r}. Known: {sorted(known)}")


class ProtocolError(RuntimeError):
    """Raised when a policy breaks the player contract during an episode.

    For example, an active policy that gives no arm, or a policy that requires
    collision sensing receiving a reward only observation. The episode is aborted.
    """


class EventNotKnownError(ValueError):
    """The event is not a known one."""
