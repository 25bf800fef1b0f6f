# vibromirror/runtime/concurrency.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

from __future__ import annotations

import logging
import os
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import contextmanager
from typing import Callable, Iterable, Iterator, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class _ExecutorFactory:
    """Internal factory for producing worker pools; one process per job."""

    def create_executor(self, jobs: int) -> Executor:
        return ProcessPoolExecutor(max_workers=jobs)


def default_jobs() -> int:
    """Machine parallelism, at least one."""
    return os.cpu_count() or 1


@contextmanager
def worker_pool(jobs: int) -> Iterator[Executor]:
    """
    A context manager yielding a pool of `jobs` workers and shutting it down on exit,
    also when the body raises.
    """
    executor = _ExecutorFactory().create_executor(jobs)
    try:
        yield executor
    finally:
        executor.shutdown(wait=True, cancel_futures=True)


def map_ordered(fn: Callable[[T], R], items: Iterable[T], jobs: Optional[int] = None) -> List[R]:
    """
    Apply fn to every item, in parallel when jobs > 1, and return the results in input order.

    fn must be picklable (a module-level function) when jobs > 1. The first exception
    raised by any item propagates.
    """
    items = list(items)
    jobs = default_jobs() if jobs is None else jobs
    jobs = max(1, min(jobs, len(items)))
    if jobs == 1:
        return [fn(item) for item in items]
    logger.info(f"Dispatching {len(items)} tasks to {jobs} workers")
    with worker_pool(jobs) as pool:
        return list(pool.map(fn, items))
