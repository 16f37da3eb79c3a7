import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    """Worker count from ``DXL_THREADS`` (defaults to the machine's cores)."""
    raw = os.environ.get("DXL_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n >= 1:
            return n
    return os.cpu_count() or 1


def ordered_map(fn, tasks, threads=None):
    """Apply ``fn`` to every task and return results in task order.

    Each task must be self-contained (its own seed); the result list is
    therefore identical for any worker count.
    """
    tasks = list(tasks)
    n = thread_count() if threads is None else threads
    if n <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=min(n, len(tasks))) as pool:
        return list(pool.map(fn, tasks))
