"""Worker-thread configuration.

WEICOM_THREADS caps kernel parallelism (0 or unset means auto).  Results
are bitwise identical at any setting; the cap only controls how many rows
are scored concurrently.
"""

from __future__ import annotations

import os

import numba

from .errors import WeicomError

ENV_VAR = "WEICOM_THREADS"


def thread_cap() -> int:
    """Parse WEICOM_THREADS; 0 means auto."""
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return 0
    try:
        cap = int(raw)
    except ValueError:
        raise WeicomError(f"{ENV_VAR} must be a non-negative integer, got {raw!r}") from None
    if cap < 0:
        raise WeicomError(f"{ENV_VAR} must be a non-negative integer, got {cap}")
    return cap


def apply_thread_cap(cap: int | None = None) -> int:
    """Apply the worker cap to the scoring kernels; returns the effective count."""
    if cap is None:
        cap = thread_cap()
    available = numba.config.NUMBA_NUM_THREADS
    effective = available if cap == 0 else max(1, min(cap, available))
    numba.set_num_threads(effective)
    return effective
