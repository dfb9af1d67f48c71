from __future__ import annotations

import logging
from typing import Any

import pytest

DEFAULT_SEED = 0


def pytest_addoption(parser: pytest.Parser) -> None:
    """Add the option to run the slow Monte-Carlo checks."""
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Run the tests marked as slow",
    )


def pytest_configure(config: pytest.Config) -> None:
    """Used to register marks."""
    config.addinivalue_line("markers", "todo: Mark test as todo")
    config.addinivalue_line("markers", "slow: Monte-Carlo checks at full scale")


def pytest_collection_modifyitems(
    config: pytest.Config,
    items: list[pytest.Item],
) -> None:
    """Skip the slow tests unless asked for."""
    if config.getoption("--run-slow"):
        return

    skip_slow = pytest.mark.skip(reason="Needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def pytest_runtest_setup(item: pytest.Item) -> None:
    """Run before each test."""
    todos = list(item.iter_markers(name="todo"))
    if todos:
        pytest.xfail(f"Test needs to be implemented, {item.location}")


@pytest.fixture(autouse=True)
def _restore_options() -> Any:
    """Tests may set options, put them back afterwards."""
    from mmabtk.options import _mmabtk_options

    saved = dict(_mmabtk_options)
    yield
    _mmabtk_options.update(saved)  # type: ignore[typeddict-item]


def pytest_sessionfinish(*_: Any) -> None:
    """Remove the handlers the CLI tests installed with `logging.basicConfig`."""
    loggers = [logging.getLogger(), *list(logging.Logger.manager.loggerDict.values())]
    for logger in loggers:
        handlers = getattr(logger, "handlers", [])
        for handler in handlers:
            logger.removeHandler(handler)  # type: ignore
