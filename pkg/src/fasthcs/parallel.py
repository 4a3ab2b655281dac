"""Order-preserving parallel map and seed derivation.

Every unit of work gets its own generator derived from a tuple of integers,
so results never depend on how work is scheduled across workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def rng_for(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


def derive_seed(*key: int) -> int:
    """A 32-bit seed that is a pure function of ``key``."""
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1)[0])


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    workers: int = 1,
    processes: bool = False,
) -> list[R]:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    pool = ProcessPoolExecutor if processes else ThreadPoolExecutor
    with pool(max_workers=workers) as ex:
        return list(ex.map(fn, items))
