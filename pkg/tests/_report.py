"""Per-criterion pass/fail lines collected by the acceptance suite."""

from __future__ import annotations

import time
from contextlib import contextmanager

RESULTS: dict[int, str] = {}


@contextmanager
def criterion(n: int, title: str, limit_s: float):
    """Record PASS/FAIL for criterion ``n``; the stated runtime limit is part of it."""
    info: dict = {}
    t0 = time.perf_counter()
    try:
        yield info
        elapsed = time.perf_counter() - t0
        assert elapsed < limit_s, f"runtime {elapsed:.1f}s exceeds {limit_s}s"
    except BaseException as e:
        elapsed = time.perf_counter() - t0
        RESULTS[n] = f"criterion {n:>2} FAIL  {title} ({elapsed:.1f}s) {_fmt(info)} :: {e}".rstrip()
        raise
    RESULTS[n] = f"criterion {n:>2} PASS  {title} ({elapsed:.1f}s) {_fmt(info)}".rstrip()
    print(RESULTS[n])


def _fmt(info: dict) -> str:
    return " ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in info.items())
