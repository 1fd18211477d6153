"""Worker-limited concurrent execution of experiment cells."""
import logging
from typing import Callable, List, Sequence, Tuple

import anyio
from anyio import to_thread
from tqdm import tqdm

from .config import settings

logger = logging.getLogger(__name__)


async def _run_all(cells: Sequence[Tuple], worker: Callable, workers: int) -> List:
    limiter = anyio.CapacityLimiter(max(1, workers))
    results = [None] * len(cells)
    progress = tqdm(total=len(cells), desc="cells", disable=not settings.SHOW_PROGRESS, leave=False)

    async def run_one(index: int, args: Tuple):
        results[index] = await to_thread.run_sync(worker, *args, limiter=limiter)
        progress.update(1)

    async with anyio.create_task_group() as tg:
        for index, args in enumerate(cells):
            tg.start_soon(run_one, index, args)
    progress.close()
    return results


def run_cells(cells: Sequence[Tuple], worker: Callable, workers: int = 1) -> List:
    """Call worker(*args) for every cell; results come back in cell order."""
    logger.info("--- Running %d cells on %d worker(s) ---", len(cells), max(1, workers))
    if not cells:
        return []
    return anyio.run(_run_all, cells, worker, workers)
