"""Order-preserving worker pool."""

import logging
import sys
from concurrent import futures
from typing import Any, Callable, Iterable, List, Optional, Sequence

from tqdm import tqdm


logger = logging.getLogger(__name__)


def ordered_map(func: Callable[[Any], Any], items: Sequence[Any], jobs: int = 1,
                initializer: Optional[Callable[..., None]] = None,
                initargs: Iterable[Any] = (),
                chunksize: int = 1,
                progress: Optional[str] = None) -> List[Any]:
    """Apply func to every item and return results in input order.

    With jobs <= 1 the work runs inline; otherwise on a process pool whose
    workers are prepared once through initializer(*initargs). func and
    initializer must be importable module-level callables. A progress label
    shows a tqdm bar on standard error.
    """
    items = list(items)
    initargs = tuple(initargs)
    bar = dict(desc=progress, total=len(items), file=sys.stderr, disable=progress is None, leave=False)

    if jobs <= 1 or len(items) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [func(item) for item in tqdm(items, **bar)]

    workers = min(jobs, len(items))
    logger.debug(f"Dispatching {len(items)} items to {workers} worker processes")
    with futures.ProcessPoolExecutor(max_workers=workers, initializer=initializer,
                                     initargs=initargs) as executor:
        return list(tqdm(executor.map(func, items, chunksize=chunksize), **bar))
