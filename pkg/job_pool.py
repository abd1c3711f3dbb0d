"""
Job-Pool
========

Unabhängige, reine Jobs (Fasern, Sweep-Instanzen) parallel ausführen:

- jobs <= 1: sequentiell im eigenen Prozess
- sonst asyncio.gather über run_in_executor mit ProcessPoolExecutor
- Ergebnisse immer in Eingabe-Reihenfolge (deterministisches Zusammenführen)
"""

import asyncio
import logging
import multiprocessing
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def _make_executor(jobs: int) -> Executor:
    """Prozesspool mit 'fork', sonst Threads"""
    try:
        ctx = multiprocessing.get_context("fork")
        return ProcessPoolExecutor(max_workers=jobs, mp_context=ctx)
    except ValueError as e:
        logger.warning(f"Prozesspool nicht verfügbar ({e}), weiche auf Threads aus")
        return ThreadPoolExecutor(max_workers=jobs)


async def gather_jobs(func: Callable[[T], R], items: Sequence[T], jobs: int) -> List[R]:
    """Führt func für alle items aus; Reihenfolge der Ergebnisse = Reihenfolge der items"""
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    loop = asyncio.get_running_loop()
    with _make_executor(min(jobs, len(items))) as executor:
        futures = [loop.run_in_executor(executor, func, item) for item in items]
        results = await asyncio.gather(*futures)
    logger.debug(f"{len(items)} Jobs auf {jobs} Worker verteilt")
    return list(results)


def run_jobs(func: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> List[R]:
    """Synchrone Variante; darf nicht aus einer laufenden Event-Loop heraus aufgerufen werden"""
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    return asyncio.run(gather_jobs(func, items, jobs))
