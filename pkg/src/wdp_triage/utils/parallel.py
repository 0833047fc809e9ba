"""Order-preserving process pool map."""

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """
    Apply ``fn`` to every item, keeping input order.

    With one worker this is a plain loop. Otherwise ``fn`` and the items
    must be picklable (module-level functions, frozen dataclasses).
    """
    batch = list(items)
    if workers <= 1 or len(batch) <= 1:
        return [fn(item) for item in batch]

    logger.debug("mapping %d items over %d workers", len(batch), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, batch, chunksize=max(1, len(batch) // (4 * workers))))
