import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional

from brittle_limit.config import Config

logger = logging.getLogger(__name__)


def resolve_jobs(jobs: Optional[int] = None) -> int:
    jobs = Config.JOBS if jobs is None else jobs
    return max(1, int(jobs))


def ordered_map(fn: Callable, items: Iterable, jobs: Optional[int] = None) -> List:
    """Map ``fn`` over ``items`` keeping input order, in worker processes if jobs > 1."""
    items = list(items)
    jobs = resolve_jobs(jobs)
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.info(f"Dispatching {len(items)} tasks to {jobs} worker processes")
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(fn, items))
