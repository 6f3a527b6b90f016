"""Order-preserving worker-pool map over independent time nodes."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from sixwave import constants
from sixwave.exceptions import ConfigError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def effective_workers(requested: int) -> int:
    """Cap `requested` by the SIXWAVE_MAX_WORKERS environment variable.

    Raises:
        ValueError: requested <= 0
        ConfigError: the environment variable is not a positive integer
    """
    if requested <= 0:
        raise ValueError(f"max_workers must be positive, got {requested}")
    raw = os.environ.get(constants.ENV_MAX_WORKERS)
    if raw is None or not raw.strip():
        return requested
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"{constants.ENV_MAX_WORKERS} must be an integer, got {raw!r}") from None
    if cap <= 0:
        raise ConfigError(f"{constants.ENV_MAX_WORKERS} must be positive, got {cap}")
    return min(requested, cap)


def map_nodes(func: Callable[[T], R], items: Iterable[T], max_workers: int = 1) -> list[R]:
    """Apply `func` to every item; results keep the input order.

    Runs sequentially when the effective worker count is 1, otherwise on a
    ThreadPoolExecutor. numpy releases the GIL inside the heavy kernels.
    """
    work = list(items)
    workers = effective_workers(max_workers)
    if workers == 1 or len(work) <= 1:
        return [func(item) for item in work]
    logger.debug("mapping %d nodes on %d workers", len(work), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, work))
