"""Thread-pool map honouring the ``LENSFLOW_THREADS`` cap."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_cap() -> int:
    raw = os.environ.get("LENSFLOW_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def pmap(func: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map; serial unless ``LENSFLOW_THREADS`` asks for more workers."""
    items = list(items)
    workers = min(thread_cap(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
