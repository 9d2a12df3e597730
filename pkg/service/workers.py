# service/workers.py
from __future__ import annotations

import logging
import multiprocessing
from contextlib import contextmanager
from typing import Any, Callable, Iterable, Iterator

import quiet

logger = logging.getLogger("elocus")

Mapper = Callable[[Callable[..., Any], Iterable[tuple]], list]


def _init_worker() -> None:
    quiet.apply_library_quiet_logging()


@contextmanager
def worker_pool(workers: int) -> Iterator[Mapper | None]:
    """
    Yield a starmap-like callable backed by a process pool.

    Yields None for a single worker so callers run serially in-process; results
    come back in job order either way.

    Args:
        workers (int): Number of processes.
    """
    if workers <= 1:
        yield None
        return

    # NOTE: spawn, since the HTTP service calls in from a worker thread
    ctx = multiprocessing.get_context("spawn")
    logger.info("starting a pool of %d worker processes", workers)
    with ctx.Pool(processes=workers, initializer=_init_worker) as pool:
        def starmap(fn: Callable[..., Any], jobs: Iterable[tuple]) -> list:
            return pool.starmap(fn, list(jobs), chunksize=1)
        yield starmap


def run_jobs(mapper: Mapper | None, fn: Callable[..., Any], jobs: Iterable[tuple]) -> list:
    if mapper is None:
        return [fn(*job) for job in jobs]
    return mapper(fn, jobs)
