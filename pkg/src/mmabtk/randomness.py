"""Utilities for dealing with randomness.

Every episode owns one environment stream and one stream per player, all
derived from a master seed with [`derive_rng()`][mmabtk.randomness.derive_rng].
A stream is keyed by its role and index only, so adding a player never
perturbs the draws of the environment or of the other players.
"""
from __future__ import annotations

import zlib
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from mmabtk.types import Seed

MAX_INT = np.iinfo(np.int32).max


def as_rng(seed: Seed | None = None) -> np.random.Generator:
    """Converts a valid seed arg into a numpy.random.Generator instance.

    Args:
        seed: The seed to use

    Returns:
        A valid np.random.Generator object to use
    """
    match seed:
        case None | int() | np.integer():
            return np.random.default_rng(seed)
        case np.random.Generator():
            return seed

    raise ValueError(f"Can't {seed=} ({type(seed)}) to create numpy.random.Generator")


def as_int(seed: Seed | None = None) -> int:
    """Converts a valid seed arg into an integer.

    Args:
        seed: The seed to use

    Returns:
        A valid integer to use as a seed
    """
    match seed:
        case None:
            return int(np.random.default_rng().integers(0, MAX_INT))
        case np.integer() | int():
            return int(seed)
        case np.random.Generator():
            return int(seed.integers(0, MAX_INT))

    raise ValueError(f"Can't {seed=} ({type(seed)}) to create int")


def stream_key(role: str, index: int) -> tuple[int, int]:
    """The spawn key of the stream `(role, index)`.

    The role is hashed with crc32 so the key is stable across interpreters,
    unlike the builtin `hash()` of a string.
    """
    if index < 0:
        raise ValueError(f"Stream index must be non-negative, got {index=}")
    return (zlib.crc32(role.encode("utf-8")), index)


def derive_seed_sequence(seed: int, role: str, index: int) -> np.random.SeedSequence:
    """Derive the seed sequence of the stream `(role, index)` under `seed`."""
    return np.random.SeedSequence(entropy=seed, spawn_key=stream_key(role, index))


def derive_rng(seed: Seed, role: str, index: int = 0) -> np.random.Generator:
    """Derive an independent named random stream from a master seed.

    ```python
    from mmabtk.randomness import derive_rng

    env = derive_rng(42, "environment")
    player_0 = derive_rng(42, "player", 0)
    ```

    Args:
        seed: The master seed. A generator is first reduced to an int.
        role: The role of the stream, e.g. `#!python "environment"` or
            `#!python "player"`.
        index: The index of the stream within its role.

    Returns:
        A generator which only depends on `(seed, role, index)`.
    """
    ss = derive_seed_sequence(as_int(seed), role, index)
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: Seed, role: str, index: int = 0) -> int:
    """Derive an integer seed for the stream `(role, index)`.

    Used for the per run seeds of a batch, `seed_i = derive_seed(master, "run", i)`.
    """
    ss = derive_seed_sequence(as_int(seed), role, index)
    return int(ss.generate_state(1, dtype=np.uint32)[0]) % MAX_INT
