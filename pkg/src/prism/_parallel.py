"""Deterministic blocked map over matrix rows.

Heavy kernels (score accumulation, Gram matrices) are expressed as a map
over fixed-size row blocks followed by a reduction in block order. The
block partition never depends on the worker count, and the final reduce
is always sequential in ascending block index, so results are bitwise
identical for any thread setting.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, Sequence, TypeVar

T = TypeVar("T")

# Rows per block. Fixed so the f64 partial sums are reproducible across
# thread counts; 4096 keeps per-block temporaries small at desk scale.
BLOCK_ROWS = 4096

_THREADS_ENV = "PRISM_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Explicit argument wins, then PRISM_THREADS, then the CPU count."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(_THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def iter_blocks(n_rows: int, block_rows: int = BLOCK_ROWS) -> Iterator[tuple[int, int]]:
    for start in range(0, n_rows, block_rows):
        yield start, min(start + block_rows, n_rows)


def map_row_blocks(
    n_rows: int,
    fn: Callable[[int, int], T],
    threads: int | None = None,
    block_rows: int = BLOCK_ROWS,
) -> list[T]:
    """Apply ``fn(start, stop)`` to every row block; results in block order.

    numpy releases the GIL inside the kernels, so a thread pool gives real
    parallelism without sacrificing the fixed reduction order.
    """
    bounds: Sequence[tuple[int, int]] = list(iter_blocks(n_rows, block_rows))
    n_threads = resolve_threads(threads)
    if n_threads <= 1 or len(bounds) <= 1:
        return [fn(start, stop) for start, stop in bounds]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(lambda b: fn(b[0], b[1]), bounds))
