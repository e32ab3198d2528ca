from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np
import psutil

from rabisense.logger import init_logger

T = TypeVar("T")
R = TypeVar("R")
logger = init_logger(__name__)


def get_cpu_count() -> int:
    """Returns the number of logical CPUs, at least one."""
    return psutil.cpu_count(logical=True) or 1


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one Monte-Carlo trial; depends only on (seed, trial)."""
    return np.random.default_rng([seed, trial])


def parallel_map(
    fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None
) -> List[R]:
    """Map `fn` over `items` on a thread pool. Results keep the input order."""
    items = list(items)
    if threads is None:
        threads = get_cpu_count()
    threads = max(1, min(threads, len(items) or 1))
    if threads == 1:
        return [fn(item) for item in items]
    logger.debug("Dispatching %d tasks to %d threads.", len(items), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def format_float(x: float) -> str:
    """Shortest round-tripping text for a float, so tables are byte-reproducible."""
    return repr(float(x))
