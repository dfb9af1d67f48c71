"""Stores low-level types used through the library."""
from __future__ import annotations

from collections.abc import Mapping
from typing import NoReturn, TypeAlias

import numpy as np

Seed: TypeAlias = int | np.integer | np.random.Generator
"""Anything a random stream can be seeded from."""

Arm: TypeAlias = int
"""A zero-based arm index in `range(K)`."""

PlayerId: TypeAlias = int
"""A zero-based player index, the position of the player in the instance entries."""

Pulls: TypeAlias = Mapping[PlayerId, Arm]
"""The arms pulled in one round, only for the players active in that round."""


def assert_never(value: NoReturn) -> NoReturn:
    """Utility function for asserting that a value is never reached."""
    raise AssertionError(f"This code should never be reached, got: {value}")
