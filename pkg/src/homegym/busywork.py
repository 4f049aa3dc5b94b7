"""Deterministic CPU busy-work used to model per-step simulation cost.

The cost model charges a fixed number of arithmetic iterations per
millisecond, calibrated once per process.  Unlike ``time.sleep`` this keeps
the work deterministic (same iterations every call) while still occupying
the CPU, so latency measurements reflect genuine contention.
"""

from __future__ import annotations

import time

_ITERS_PER_MS: float | None = None


def _burn(iterations: int) -> int:
    # xorshift-style integer mixing; cheap, unoptimisable-away, allocation-free
    x = 0x9E3779B9
    for _ in range(iterations):
        x ^= (x << 13) & 0xFFFFFFFF
        x ^= x >> 17
        x ^= (x << 5) & 0xFFFFFFFF
    return x


def _calibrate() -> float:
    probe = 50_000
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        _burn(probe)
        best = min(best, time.perf_counter() - t0)
    return probe / (best * 1000.0)


def iters_per_ms() -> float:
    global _ITERS_PER_MS
    if _ITERS_PER_MS is None:
        _ITERS_PER_MS = _calibrate()
    return _ITERS_PER_MS


def spin_ms(ms: float) -> None:
    """Burn roughly ``ms`` milliseconds of CPU as a fixed iteration count."""
    if ms <= 0:
        return
    _burn(max(1, int(ms * iters_per_ms())))


def spin_until_deadline(seconds: float) -> None:
    """Busy-spin until ``seconds`` of wall clock have elapsed.

    Used for synthetic scene-load cost in the latency bench: wall-exact even
    under CPU contention, while still never yielding via sleep.
    """
    deadline = time.perf_counter() + seconds
    while time.perf_counter() < deadline:
        _burn(2_000)
