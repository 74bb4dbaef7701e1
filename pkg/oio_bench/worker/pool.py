"""
Bounded process pool for replications and sweep cells.
"""
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence, Tuple

import logging

from oio_bench.core.config import settings

logger = logging.getLogger(__name__)

# Determine the worker ceiling
_NUM_WORKERS = min(multiprocessing.cpu_count(), settings.MAX_WORKERS)


class ReplicationPool:
    """
    Runs independent tasks in worker processes, results in submission order.

    Features:
    - jobs=1 runs inline (no subprocess, easier debugging)
    - worker count capped by CPU count and settings.MAX_WORKERS
    - ordered results, so outputs do not depend on scheduling
    """

    def __init__(self, jobs: int = 1):
        if jobs == -1:
            self.workers = _NUM_WORKERS
        else:
            self.workers = max(1, min(jobs, _NUM_WORKERS))

    def map(self, fn: Callable[..., Any], arguments: Sequence[Tuple[Any, ...]]) -> List[Any]:
        """
        Apply a picklable top-level function to every argument tuple.

        Args:
            fn: worker function
            arguments: one tuple of positional arguments per task

        Returns:
            Results in the order of ``arguments``
        """
        if not arguments:
            return []
        if self.workers == 1 or len(arguments) == 1:
            return [fn(*args) for args in arguments]

        logger.info(f"Dispatching {len(arguments)} tasks to {self.workers} workers")
        columns = list(zip(*arguments))
        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(fn, *columns))
