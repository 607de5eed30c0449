"""
A job runner that limits the number of concurrent worker processes.
"""


import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from loguru import logger

ItemType = TypeVar("ItemType")
ResultType = TypeVar("ResultType")


class JobRunner:
    """
    Runs independent jobs with bounded concurrency. Results are always
    returned in submission order, so any reduction over them is
    deterministic.
    """

    def __init__(
        self,
        max_jobs: int = 1,
        initializer: Callable[[], None] | None = None,
    ):
        """
        Args:
            max_jobs: The maximum number of jobs to run at once. With 1 or
                fewer, jobs run sequentially in the calling process.
            initializer: Called once in every worker process before it runs
                any jobs. Must be picklable.
        """
        self.__max_jobs = max(1, max_jobs)
        self.__initializer = initializer

    @property
    def max_jobs(self) -> int:
        """
        The maximum number of concurrent jobs.
        """
        return self.__max_jobs

    def map(
        self,
        func: Callable[[ItemType], ResultType],
        items: Iterable[ItemType],
    ) -> List[ResultType]:
        """
        Applies a function to every item.

        Args:
            func: The function to apply. When running in parallel, it must
                be picklable (a module-level function or a `partial` of
                one).
            items: The items to process.

        Returns:
            The results, in the same order as `items`.

        """
        items = list(items)
        if self.__max_jobs == 1 or len(items) <= 1:
            return [func(item) for item in items]

        num_workers = min(self.__max_jobs, len(items))
        logger.debug("Running {} jobs on {} workers.", len(items), num_workers)
        # Forking a process that already initialized torch can deadlock.
        context = mp.get_context("spawn")
        with ProcessPoolExecutor(
            max_workers=num_workers,
            mp_context=context,
            initializer=self.__initializer,
        ) as executor:
            return list(executor.map(func, items))
