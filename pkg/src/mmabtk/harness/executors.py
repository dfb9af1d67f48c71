"""Executors that run the episodes of a batch.

Episodes are independent, so a batch maps them over a
[`ProcessPoolExecutor`][concurrent.futures.ProcessPoolExecutor], or over the
[`SequentialExecutor`][mmabtk.harness.executors.SequentialExecutor] for a
single worker, which keeps everything in one process and easy to debug.

A `ProcessPoolExecutor` does not stop its running workers on
`shutdown(wait=False)`, they keep running their episode to completion. When a
batch aborts we terminate them with `psutil`.
"""
from __future__ import annotations

import logging
from collections.abc import Callable
from concurrent.futures import Executor, Future, ProcessPoolExecutor
from contextlib import suppress
from typing import TypeVar
from typing_extensions import ParamSpec, override

import psutil

R = TypeVar("R")
P = ParamSpec("P")

logger = logging.getLogger(__name__)


class SequentialExecutor(Executor):
    """An [Executor][concurrent.futures.Executor] running each submission at once."""

    @override
    def submit(
        self,
        fn: Callable[P, R],
        /,
        *args: P.args,
        **kwargs: P.kwargs,
    ) -> Future[R]:
        """Run a function and return its already resolved future.

        Args:
            fn: The function to execute.
            *args: The positional arguments to pass to the function.
            **kwargs: The keyword arguments to pass to the function.

        Returns:
            A future resolved with the result or exception of the function.
        """
        future: Future[R] = Future()
        future.set_running_or_notify_cancel()

        try:
            future.set_result(fn(*args, **kwargs))
        except BaseException as exc:  # noqa: BLE001
            future.set_exception(exc)

        return future


def make_executor(workers: int) -> Executor:
    """A process pool of `workers` processes, or a sequential executor for one."""
    if workers < 1:
        raise ValueError(f"{workers=} must be at least 1")
    if workers == 1:
        return SequentialExecutor()
    return ProcessPoolExecutor(max_workers=workers)


def polite_kill(process: psutil.Process, timeout: int | None = None) -> None:
    """Send SIGTERM to a process, and SIGKILL if it is still running after `timeout`."""
    with suppress(psutil.NoSuchProcess):
        process.terminate()
        try:
            process.wait(timeout=timeout)
        except psutil.TimeoutExpired:
            process.kill()


def terminate_workers(executor: Executor) -> None:
    """Stop an executor without waiting for its running episodes.

    Pending submissions are cancelled. The workers of a process pool are
    terminated, their own children first.
    """
    executor.shutdown(wait=False, cancel_futures=True)
    if not isinstance(executor, ProcessPoolExecutor):
        return

    processes = getattr(executor, "_processes", None) or {}
    for process in list(processes.values()):
        try:
            worker = psutil.Process(process.pid)
            children = reversed(worker.children(recursive=True))
        except psutil.NoSuchProcess:
            continue

        for child in children:
            polite_kill(child, timeout=5)

        polite_kill(worker, timeout=5)
        logger.debug(f"Terminated worker {process.pid}")
