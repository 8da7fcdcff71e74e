"""Per-mode worker pool."""

from concurrent.futures import ThreadPoolExecutor
import logging
import os
from typing import Callable, List, Sequence, TypeVar


# Environment variable holding the worker count.
THREADS_VARIABLE = 'PLANE_NAVIER_STOKES_THREADS'

T = TypeVar('T')
R = TypeVar('R')


def worker_count() -> int:
    """Number of workers requested through the environment (at least 1)."""
    value = os.environ.get(THREADS_VARIABLE, '1')
    try:
        return max(1, int(value))
    except ValueError:
        logging.warning('Ignoring %s=%r; running single-threaded', THREADS_VARIABLE, value)
        return 1


def map_modes(function: Callable[[T], R], items: Sequence[T]) -> List[R]:
    """
    Applies function to every item, returning results in input order.

    Each item is computed independently, so the result does not depend on the
    number of workers. The first exception raised by a worker propagates.
    """

    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(function, items))
