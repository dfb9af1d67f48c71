"""Options for the MMABTK package.

In general, these options are not intended for functional differences of the
protocols but for how the simulator samples and reports, such as the chunking
of draws or the checkpoint grid of reports.
"""
from __future__ import annotations

from typing import Any, TypedDict, TypeVar, overload


class MMABTKOptions(TypedDict):
    """The options available for MMABTK.

    ```python
    from mmabtk import options

    print(options.get_option("checkpoint_base"))
    ```
    """

    draw_chunk_size: int
    """How many rounds of arm draws the episode loop samples in one numpy call."""

    beta_concentration: float
    """The concentration of the Beta draws of bounded-general arms."""

    checkpoint_base: int
    """The base of the geometric grid of rounds at which reports record regret."""


_mmabtk_options: MMABTKOptions = {
    "draw_chunk_size": 4096,
    "beta_concentration": 4.0,
    "checkpoint_base": 2,
}

T = TypeVar("T")


@overload
def get_option(name: str, default: None = None) -> Any | None:
    ...


@overload
def get_option(name: str, default: T) -> Any | T:
    ...


def get_option(name: str, default: T | None = None) -> Any | T | None:
    """Get an option.

    ```python
    from mmabtk import options

    print(options.get_option("draw_chunk_size"))
    ```
    """
    return _mmabtk_options.get(name, default)


def set_option(name: str, value: Any) -> None:
    """Set an option, erring on names that are not an option."""
    if name not in _mmabtk_options:
        raise KeyError(f"{name!r} is not an option. Known: {list(_mmabtk_options)}")
    _mmabtk_options[name] = value  # type: ignore[literal-required]
