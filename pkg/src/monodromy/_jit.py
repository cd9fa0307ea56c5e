import logging
from collections.abc import Callable
from typing import Any

logger = logging.getLogger(__name__)

try:
    from numba import njit

    NUMBA_INSTALLED = True
except ImportError:
    NUMBA_INSTALLED = False
    logger.debug("numba not importable; the transport kernel runs as plain Python")


def optional_njit(*args: Any, **kwargs: Any) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    "`numba.njit` when numba is available, otherwise the undecorated function."

    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        if NUMBA_INSTALLED:
            return njit(*args, **kwargs)(func)  # pyright: ignore[reportUnknownVariableType]
        return func

    return decorator
