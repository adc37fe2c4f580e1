"""Thread-count plumbing shared by the oracle and the sweep runner.

Work is split into independent, pre-seeded units whose results are
merged by index, so the outcome is bit-identical for any thread count;
``QPON_SIM_THREADS`` only caps how many run concurrently.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import ConfigError

THREADS_ENV_VAR = "QPON_SIM_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def thread_count(explicit: int | None = None) -> int:
    """Resolve the worker count: explicit argument, env var, else 1."""
    if explicit is None:
        raw = os.environ.get(THREADS_ENV_VAR, "1")
        try:
            explicit = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from exc
    if explicit < 1:
        raise ConfigError(f"thread count must be >= 1, got {explicit}")
    return explicit


def ordered_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T], threads: int) -> list[R]:
    """Apply ``fn`` to every item, preserving input order in the result."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
