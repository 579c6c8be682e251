import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    """Pool size, capped by ``LACUNA_THREADS`` when set."""
    cap = os.environ.get("LACUNA_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"LACUNA_THREADS must be an integer, got {cap!r}")
    return n


def ordered_map(fn, items):
    """``list(map(fn, items))`` on a thread pool; output order follows input order."""
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
