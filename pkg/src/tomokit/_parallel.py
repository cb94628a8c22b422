import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "TOMOKIT_THREADS"


def resolve_threads(threads=None):
    if threads is None:
        threads = os.environ.get(THREADS_ENV, "1")
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def ordered_map(fn, items, threads=None):
    """``list(map(fn, items))``, optionally on a thread pool; order is kept."""
    threads = resolve_threads(threads)
    items = list(items)
    if threads == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def blocks(n_items, block_size):
    """Fixed partition of ``range(n_items)``; independent of the thread count."""
    return [slice(i, min(i + block_size, n_items)) for i in range(0, n_items, block_size)]
