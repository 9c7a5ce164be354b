"""Order-preserving thread pool map for parameter sweeps."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(
    fn: Callable[[T], R],
    items: Sequence[T],
    workers: int = 1,
    on_done: Optional[Callable[[], None]] = None,
) -> List[R]:
    """
    Apply ``fn`` to every item; results come back in input order.

    Args:
        fn: Pure function of one item
        items: Inputs
        workers: Thread count (1 runs inline)
        on_done: Called after each finished item, e.g. to advance a progress bar

    Returns:
        Results in the order of ``items``
    """

    def run(item):
        result = fn(item)
        if on_done is not None:
            on_done()
        return result

    if workers <= 1 or len(items) <= 1:
        return [run(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, items))
