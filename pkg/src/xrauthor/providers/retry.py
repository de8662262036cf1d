"""Transient-failure retry with bounded exponential backoff."""
from __future__ import annotations

import logging
import time
from typing import Callable, TypeVar

from ..errors import ProviderError

logger = logging.getLogger(__name__)

T = TypeVar("T")

MAX_ATTEMPTS = 3
BASE_DELAY_S = 1.0


def retry_transient(
    fn: Callable[[], T],
    *,
    attempts: int = MAX_ATTEMPTS,
    base_delay: float = BASE_DELAY_S,
    sleep: Callable[[float], None] = time.sleep,
) -> T:
    """Call ``fn``, retrying retryable provider errors.

    Delays grow strictly (base, 2*base, ...); at most ``attempts`` calls are
    made, then the last error propagates.
    """
    delay = base_delay
    for attempt in range(1, attempts + 1):
        try:
            return fn()
        except ProviderError as exc:
            if not exc.retryable or attempt == attempts:
                raise
            logger.warning("transient provider failure (attempt %d/%d): %s", attempt, attempts, exc)
            sleep(delay)
            delay *= 2
    raise AssertionError("unreachable")
