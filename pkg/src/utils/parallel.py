#!/usr/bin/env python3
"""
Deterministic Parallel Helpers
Order-preserving thread map and exactly rounded reductions.

Work is always split into the same chunks regardless of the worker count,
and partial results are combined with ``math.fsum`` in chunk order, so a
total is bit-identical for 1 or 64 threads.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

import numpy as np

T = TypeVar('T')
R = TypeVar('R')

# Chunk size used when splitting index ranges; independent of thread count
DEFAULT_CHUNK = 4096


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """
    Apply ``fn`` to every item, preserving input order.

    Args:
        fn: Function to apply
        items: Work items
        threads: Worker threads; 1 runs inline

    Returns:
        List[R]: Results in the order of ``items``
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunk_ranges(total: int, chunk: int = DEFAULT_CHUNK) -> List[range]:
    """Split ``range(total)`` into consecutive fixed-size chunks."""
    return [range(start, min(start + chunk, total)) for start in range(0, total, chunk)]


def deterministic_sum(values: Iterable[float]) -> float:
    """
    Exactly rounded sum of floats.

    Args:
        values: Floats or a numpy array

    Returns:
        float: The correctly rounded total
    """
    if isinstance(values, np.ndarray):
        return math.fsum(values.ravel().tolist())
    return math.fsum(values)
