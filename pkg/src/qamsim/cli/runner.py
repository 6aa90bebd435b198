"""Worker-pool plumbing shared by the CLI commands.

Work items (tau points, beta points, ensemble members, orbit seeds) are
independent, so they fan out over a thread pool; numpy releases the GIL
in the kernels that dominate each item.  Results always come back in
submission order and all file writes happen serially in the caller, so
thread count never affects output bytes.
"""

from __future__ import annotations

import os
import sys
from concurrent.futures import ThreadPoolExecutor

from ..errors import ConfigError

THREADS_ENV = "QAM_THREADS"


def resolve_threads(cli_value: int | None) -> int:
    """--threads beats QAM_THREADS beats cpu count (capped at 8)."""
    if cli_value is not None:
        value = cli_value
    else:
        env = os.environ.get(THREADS_ENV)
        if env is not None:
            try:
                value = int(env)
            except ValueError:
                raise ConfigError(
                    f"{THREADS_ENV} must be an integer, got {env!r}"
                ) from None
        else:
            value = min(os.cpu_count() or 1, 8)
    if value < 1:
        raise ConfigError(f"thread count must be >= 1, got {value}")
    return value


def parallel_map(fn, items, threads: int) -> list:
    """Map fn over items, preserving order; serial when threads == 1."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))


def progress(msg: str) -> None:
    """One progress line on stdout."""
    print(msg, flush=True)


def diagnostic(msg: str) -> None:
    """One diagnostic line on stderr."""
    print(msg, file=sys.stderr, flush=True)
