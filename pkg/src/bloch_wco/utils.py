"""
Shared helpers: ordered parallel map and logging setup.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    Apply fn to every item, preserving input order.

    Parameters:
    -----------
    fn : callable
        Pure function of one argument.
    items : iterable
        Job inputs.
    workers : int
        Thread count; 1 runs inline.

    Returns:
    --------
    list
        Results in the order of items, independent of completion order.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def configure_logging(level: str = "INFO") -> None:
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT)
