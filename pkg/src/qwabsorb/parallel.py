"""Thread-pool map capped by the ``QWALK_THREADS`` environment variable."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from .errors import ConfigurationError

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "QWALK_THREADS"


def worker_count(default: Optional[int] = None) -> int:
    """Thread cap: ``QWALK_THREADS`` if set, else ``os.cpu_count()``."""
    raw = os.environ.get(ENV_VAR)
    if raw is None or raw.strip() == "":
        return max(1, default or os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigurationError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
    return n


def pmap(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Ordered map; runs inline when only one worker is available."""
    items = list(items)
    workers = min(workers or worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
