"""
Worker pool for lane-parallel Monte Carlo
Lanes are cut into fixed-size chunks that do not depend on the worker count, and
results are gathered in chunk order, so parallelism never changes a number.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

logger = logging.getLogger(__name__)

WORKERS_ENV = "COCYCLE_LAB_WORKERS"
LANE_CHUNK = 128

T = TypeVar("T")
R = TypeVar("R")


def resolve_worker_count(cli_value: Optional[int] = None) -> int:
    """CLI flag > COCYCLE_LAB_WORKERS > 1"""
    if cli_value is not None:
        return max(1, int(cli_value))
    env_value = os.getenv(WORKERS_ENV)
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError:
            logger.warning(f"⚠️ Ignoring non-integer {WORKERS_ENV}={env_value!r}")
    return 1


def chunk_ranges(total: int, chunk: int = LANE_CHUNK) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk, total)) for start in range(0, total, chunk)]


class WorkerPool:
    """Singleton thread pool shared by every service call of one run"""

    _instance = None

    def __new__(cls, workers: int = 1):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance.workers = 1
        return cls._instance

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))

    def map(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """Ordered map; threads only when there is more than one chunk"""
        if self.workers <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(fn, items))


def configure_worker_pool(workers: Optional[int] = None) -> WorkerPool:
    count = resolve_worker_count(workers)
    pool = WorkerPool(count)
    logger.info(f"🔧 Worker pool set to {pool.workers} worker(s)")
    return pool


def get_worker_pool() -> WorkerPool:
    """Get the global worker pool instance"""
    if WorkerPool._instance is None:
        return WorkerPool(resolve_worker_count())
    return WorkerPool._instance
